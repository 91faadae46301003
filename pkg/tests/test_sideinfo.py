"""Rate planner and side-information pipeline tests."""

import itertools
import math
from dataclasses import replace

import pytest

from compoundcode.ensembles import EnsembleParams, assemble, new_rng, random_bitvector
from compoundcode.gf2 import BitVector, matvec
from compoundcode.sideinfo import (
    InfeasiblePlanError,
    override_plan_counts,
    plan_rates_ccsi,
    plan_rates_scsi,
    run_ccsi,
    run_scsi,
    simulate_ccsi,
    simulate_scsi,
)


def h2(x):
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


# ---------------------------------------------------------------------------
# SCSI planner


def test_scsi_plan_reference_point():
    # Entropy arithmetic recomputed from scratch as the oracle.
    D, p, eps, n = 0.11, 0.03, 0.02, 1200
    plan = plan_rates_scsi(D, p, eps, n)
    conv = D * (1 - p) + (1 - D) * p
    assert conv == pytest.approx(0.1334)
    assert plan.m - plan.k1 == round(n * (1 - h2(D) + eps / 2)) == 612
    assert plan.m - plan.k1 - plan.k2 == round(n * (1 - h2(conv) - eps / 2)) == 508
    assert plan.k2 == 104
    assert plan.r_trans == pytest.approx(104 / 1200)
    assert plan.target_r_trans == pytest.approx(h2(conv) - h2(D) + eps, abs=1e-9)
    assert plan.gap_trans < 1 / 600


def test_scsi_plan_useless_side_information():
    # p = 1/2 makes the side channel useless: the channel-rate target hits
    # zero (clamped) and r_trans recovers classical rate-distortion plus
    # the slack.
    eps = 0.02
    plan = plan_rates_scsi(0.11, 0.5, eps, 2000)
    assert plan.target_r_trans == pytest.approx(1 - h2(0.11) + eps, abs=1e-12)
    assert plan.m - plan.k1 - plan.k2 == 0
    assert abs(plan.r_trans - plan.target_r_trans) <= eps / 2 + 1 / 2000


def test_scsi_plan_epsilon_closing_gap():
    # At epsilon = 0 the slack vanishes; k2 tracks the analytic gap to
    # within rounding, hitting zero when the gap itself is ~zero.
    plan = plan_rates_scsi(0.11, 0.03, 0.0, 1200)
    conv = 0.11 * 0.97 + 0.89 * 0.03
    assert abs(plan.k2 - 1200 * (h2(conv) - h2(0.11))) <= 1.0
    tiny = plan_rates_scsi(0.3, 0.002, 0.0, 50)
    assert tiny.k2 == 0  # analytic gap below half a symbol at this blocklength


def test_scsi_plan_rate_identity():
    plan = plan_rates_scsi(0.11, 0.03, 0.02, 600)
    assert plan.k2 == (plan.m - plan.k1) - (plan.m - plan.k1 - plan.k2)
    assert plan.r_trans == pytest.approx(plan.r1 - plan.r2, abs=1e-15)


# ---------------------------------------------------------------------------
# CCSI planner


def test_ccsi_plan_analytic_branch():
    plan = plan_rates_ccsi(0.25, 0.05, 0.0, 4000)
    assert plan.analytic_gap == pytest.approx(h2(0.25) - h2(0.05), abs=1e-12)
    assert plan.analytic_gap == pytest.approx(0.52488, abs=1e-5)


def test_ccsi_plan_degenerate_budget():
    # w = p leaves no embedding rate: zero at eps = 0, infeasible once the
    # slacks must come out of a zero gap.
    plan = plan_rates_ccsi(0.2, 0.2, 0.0, 1000)
    assert plan.analytic_gap == pytest.approx(0.0, abs=1e-12)
    assert plan.k2 == 0 and plan.r_trans == 0.0
    with pytest.raises(InfeasiblePlanError):
        plan_rates_ccsi(0.2, 0.2, 0.04, 1000)


def test_ccsi_plan_rounding_audit():
    plan = plan_rates_ccsi(0.25, 0.05, 0.0, 1000)
    assert abs(plan.r_trans - (h2(0.25) - h2(0.05))) <= 1.0 / 1000


def test_ccsi_plan_infeasible():
    with pytest.raises(InfeasiblePlanError):
        plan_rates_ccsi(0.05, 0.25, 0.0, 1000)  # p > w: negative k2


def test_ccsi_plan_rate_identity():
    plan = plan_rates_ccsi(0.25, 0.05, 0.02, 500)
    assert plan.r_trans == pytest.approx(plan.r2 - plan.r1, abs=1e-15)


def test_explicit_counts_skip_rounding():
    plan = plan_rates_scsi(0.11, 0.03, 0.02, 24, m=16, k1=8, k2=4)
    assert (plan.k1, plan.k2) == (8, 4)
    assert plan.r1 == pytest.approx(8 / 24) and plan.r2 == pytest.approx(4 / 24)
    with pytest.raises(InfeasiblePlanError):
        plan_rates_scsi(0.11, 0.03, 0.02, 24, m=16, k1=8)


def test_override_plan_counts():
    plan = plan_rates_scsi(0.11, 0.03, 0.02, 24, m=16, k1=8, k2=4)
    other = override_plan_counts(plan, k1=6, k2=2)
    assert (other.k1, other.k2) == (6, 2)
    assert other.r_trans == pytest.approx(2 / 24)


# ---------------------------------------------------------------------------
# SCSI pipeline


def scsi_setup(seed=0):
    params = EnsembleParams(n=24, m=16, k=12, d_top=4, dv=3, dc_prime=4,
                            seed=seed)
    code = assemble(params, k1=8)
    plan = plan_rates_scsi(0.11, 0.03, 0.02, 24, m=16, k1=8, k2=4)
    return code, plan


def test_scsi_noiseless_codeword_source():
    code, plan = scsi_setup()
    plan0 = replace(plan, noise_p=0.0)
    from compoundcode.codec import enumerate_codewords
    _, x = list(enumerate_codewords(code, "h1"))[3]
    trace = run_scsi(code, plan0, x, new_rng(1), decoder="ml")
    assert trace.status == "decoded"
    assert trace.quant_distortion == 0.0
    assert trace.recovered
    assert trace.end_distortion == 0.0
    assert not trace.violations


def test_scsi_noiseless_channel_matches_quantizer():
    code, plan = scsi_setup(seed=5)
    plan0 = replace(plan, noise_p=0.0)
    rng = new_rng(2)
    for _ in range(20):
        s = random_bitvector(code.n, rng)
        trace = run_scsi(code, plan0, s, rng, decoder="ml")
        assert trace.status == "decoded"
        assert not trace.violations
        if trace.recovered:
            assert trace.end_distortion == pytest.approx(trace.quant_distortion)


def test_scsi_trace_identities():
    code, plan = scsi_setup(seed=7)
    rng = new_rng(3)
    for _ in range(30):
        s = random_bitvector(code.n, rng)
        trace = run_scsi(code, plan, s, rng, decoder="ml")
        assert not trace.violations
        # z XOR s-hat == e XOR noise, recomputed here from the trace fields
        e = trace.source ^ trace.quantized
        assert (trace.received ^ trace.quantized) == (e ^ trace.noise)
        assert matvec(code.H2, trace.info_word) == trace.syndrome
        assert trace.channel_weight == pytest.approx(trace.quant_distortion)


def test_scsi_batch_deterministic():
    code, plan = scsi_setup(seed=9)
    summary1, traces1 = simulate_scsi(code, plan, 50, master_seed=4)
    summary2, _ = simulate_scsi(code, plan, 50, master_seed=4)
    assert summary1.to_dict() == summary2.to_dict()
    assert summary1.violation_count == 0
    assert summary1.trials == 50
    assert len(traces1) == 50
    # thread-count independence
    summary4, _ = simulate_scsi(code, plan, 50, master_seed=4, threads=4)
    assert summary4.to_dict() == summary1.to_dict()


def test_scsi_plan_mismatch_rejected():
    code, plan = scsi_setup()
    bad = override_plan_counts(plan, k1=6, k2=4)
    with pytest.raises(ValueError):
        run_scsi(code, bad, BitVector.zeros(24), new_rng(0))


# ---------------------------------------------------------------------------
# CCSI pipeline


def ccsi_setup(seed=0):
    params = EnsembleParams(n=24, m=16, k=10, d_top=4, dv=5, dc_prime=8,
                            seed=seed)
    code = assemble(params, k1=6)
    plan = plan_rates_ccsi(0.25, 0.05, 0.02, 24, m=16, k1=6, k2=4)
    return code, plan


def test_ccsi_zero_message_codeword_host():
    code, plan = ccsi_setup()
    plan0 = replace(plan, noise_p=0.0)
    from compoundcode.codec import enumerate_codewords
    _, x = next(iter(enumerate_codewords(code, "full")))
    trace = run_ccsi(code, plan0, BitVector.zeros(code.k2), x, new_rng(1),
                     decoder="ml")
    assert trace.status == "decoded"
    assert trace.channel_weight == 0.0
    assert trace.message_out.weight() == 0
    assert trace.recovered and not trace.violations


def test_ccsi_noiseless_recovers_all_messages():
    code, plan = ccsi_setup()
    plan0 = replace(plan, noise_p=0.0)
    rng = new_rng(6)
    feasible = 0
    for bits in itertools.product((0, 1), repeat=code.k2):
        msg = BitVector.from_bits(bits)
        host = random_bitvector(code.n, rng)
        trace = run_ccsi(code, plan0, msg, host, rng, decoder="ml")
        if trace.status == "infeasible_message":
            continue
        feasible += 1
        assert trace.recovered, f"message {msg.to_string()} not recovered"
        assert not trace.violations
    assert feasible > 0


def test_ccsi_trace_identities_and_budget():
    code, plan = ccsi_setup(seed=3)
    rng = new_rng(8)
    for _ in range(30):
        msg = random_bitvector(code.k2, rng)
        host = random_bitvector(code.n, rng)
        trace = run_ccsi(code, plan, msg, host, rng, decoder="ml")
        if trace.status == "infeasible_message":
            continue
        assert not trace.violations
        # channel input weight is exactly the quantizer distortion
        assert trace.channel_weight == pytest.approx(trace.quant_distortion)
        e = trace.source ^ trace.quantized
        assert (e ^ trace.source ^ trace.noise) == trace.received
        assert matvec(code.H2, trace.info_word) == trace.syndrome


def test_ccsi_batch_reporting():
    code, plan = ccsi_setup(seed=4)
    summary, traces = simulate_ccsi(code, plan, 60, master_seed=11)
    assert summary.trials == 60
    assert summary.violation_count == 0
    assert 0.0 <= summary.recovery_rate <= 1.0
    assert summary.mean_channel_weight == pytest.approx(
        summary.mean_quant_distortion)
    rows = summary.rows
    assert len(rows) == 60 and rows[0][0] == 0


def test_trace_json_round_trip_fields():
    code, plan = scsi_setup(seed=2)
    trace = run_scsi(code, plan, random_bitvector(code.n, new_rng(5)),
                     new_rng(5))
    doc = trace.to_dict()
    assert set(doc) >= {"mode", "status", "source", "quantized", "syndrome",
                        "recovered", "violations"}
    assert doc["source"] == trace.source.to_string()
    assert isinstance(doc["recovered"], bool)
