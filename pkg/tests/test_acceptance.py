"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines.  Every tolerance is pinned here; nothing is deferred to calibration.
"""

import itertools
import json
import time
from dataclasses import replace

import numpy as np

from compoundcode import analysis
from compoundcode.analysis import (
    LN2,
    binary_entropy,
    channel_exponent_L,
    delta_fun,
    derivative_checks,
    exact_overlap_log_prob,
    ldpc_enum_bound_B,
    overlap_exponent_F,
    overlap_lambda_numeric,
    overlap_lambda_star,
    rd_min_rate,
    smallest_passing_degree,
)
from compoundcode.cli import main as cli_main
from compoundcode.codec import enumerate_codewords, moment_experiment
from compoundcode.ensembles import (
    CompoundCode,
    EnsembleParams,
    assemble,
    coset_code,
    new_rng,
    random_bitvector,
    sample_ldgm,
)
from compoundcode.gf2 import BitVector, matvec
from compoundcode.sideinfo import (
    plan_rates_ccsi,
    plan_rates_scsi,
    run_ccsi,
    simulate_ccsi,
    simulate_scsi,
)


def report(number: int, ok: bool, description: str, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    line = f"ACCEPTANCE {number:2d} {status}: {description}"
    if detail:
        line += f" [{detail}]"
    print(line)
    assert ok, line


def test_criterion_01_shannon_anchors():
    binary_entropy(0.3)  # warm up
    start = time.perf_counter()
    r11 = 1 - binary_entropy(0.11)
    r316 = 1 - binary_entropy(0.316)
    elapsed = time.perf_counter() - start
    ok = (abs(r11 - 0.50009) < 1e-4 and abs(r316 - 0.09997) < 1e-4
          and elapsed < 1e-3)
    report(1, ok, "Shannon anchors 1-h(0.11), 1-h(0.316)",
           f"{r11:.6f}, {r316:.6f}, {elapsed * 1e6:.0f}us")


def test_criterion_02_exponent_sentinels():
    start = time.perf_counter()
    sentinel_ok = True
    for D in (0.05, 0.11, 0.25, 0.316):
        sentinel_ok &= overlap_exponent_F(0.0, D) == 0.0
        sentinel_ok &= abs(overlap_exponent_F(0.5, D)
                           - (-(1 - binary_entropy(D)))) < 1e-10
    worst = 0.0
    for D in (0.05, 0.11, 0.25, 0.316):
        for t in np.linspace(0.025, 0.5, 20):
            closed = overlap_lambda_star(float(t), D).lambda_star
            worst = max(worst, abs(closed - overlap_lambda_numeric(float(t), D)))
    elapsed = time.perf_counter() - start
    ok = sentinel_ok and worst < 1e-8 and elapsed < 1.0
    report(2, ok, "exponent sentinels and closed-form saddle point",
           f"max lambda dev {worst:.2e}, {elapsed:.2f}s")


def test_criterion_03_enumerator_bound():
    start = time.perf_counter()
    half_ok = all(abs(ldpc_enum_bound_B(0.5, dv, dc) - (1 - dv / dc)) < 1e-10
                  for dv, dc in ((3, 6), (4, 8), (5, 10)))
    sym = max(abs(ldpc_enum_bound_B(float(w), 3, 6)
                  - ldpc_enum_bound_B(float(1 - w), 3, 6))
              for w in np.linspace(0.0, 1.0, 500))
    neg = max(ldpc_enum_bound_B(float(w), 3, 6)
              for w in np.linspace(1e-6, 0.02, 100))
    elapsed = time.perf_counter() - start
    ok = half_ok and sym < 1e-10 and neg < 0.0 and elapsed < 1.0
    report(3, ok, "enumerator bound B: rate at 1/2, symmetry, negativity",
           f"sym {sym:.1e}, max B on (0,0.02] {neg:.1e}, {elapsed:.2f}s")


def test_criterion_04_figure_reproduction():
    start = time.perf_counter()
    ok = True
    details = []
    for D in (0.11, 0.316):
        shannon = 1 - binary_entropy(D)
        uncoded = rd_min_rate(D, 4)
        compound = rd_min_rate(D, 4, 3, 6)
        ok &= uncoded.min_rate > shannon + 0.01
        ok &= abs(compound.min_rate - shannon) < 1e-6
        details.append(f"D={D}: unc {uncoded.min_rate:.4f} cmp "
                       f"{compound.min_rate - shannon:+.1e}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 10.0
    report(4, ok, "achievable-rate curves: uncoded above Shannon, compound at it",
           "; ".join(details) + f", {elapsed:.2f}s")


def test_criterion_05_derivative_suite():
    start = time.perf_counter()
    checks = derivative_checks(d_tops=(4, 6), rates=(0.3, 0.5),
                               enum_degrees=(3, 6))
    elapsed = time.perf_counter() - start
    failed = [c.name for c in checks if not c.passed]
    ok = not failed and elapsed < 1.0
    report(5, ok, "derivative identities at w = 1/2",
           f"{len(checks)} checks, failed: {failed or 'none'}, {elapsed:.2f}s")


def test_criterion_06_overlap_oracle_convergence():
    start = time.perf_counter()
    w, D, d = 0.3, 0.11, 4
    ref = overlap_exponent_F(delta_fun(w, d), D) * LN2
    gaps = [abs(exact_overlap_log_prob(n, w, D, d) - ref)
            for n in (100, 200, 400, 800)]
    elapsed = time.perf_counter() - start
    shrinking = all(a > b for a, b in zip(gaps, gaps[1:]))
    ok = shrinking and gaps[-1] < 0.02 and elapsed < 30.0
    report(6, ok, "exact overlap oracle converges to F",
           f"gaps {['%.4f' % g for g in gaps]} nats, {elapsed:.2f}s")


def test_criterion_07_channel_condition():
    start = time.perf_counter()
    d = smallest_passing_degree(0.08, 3, 6, R_G=1.0, d_max=32)
    # Above capacity the condition must fail at w = 1/2 via the companion.
    ce = channel_exponent_L(0.5, 0.11, 8, 3, 6, R_G=1.2)  # R = 0.6 > 0.4999
    cond = analysis.channel_condition_holds(0.11, 8, 3, 6, R_G=1.2)
    elapsed = time.perf_counter() - start
    ok = (d is not None and d <= 32 and ce.l_tilde > 0 and not cond.holds
          and elapsed < 10.0)
    report(7, ok, "channel condition: finite degree passes, above-capacity fails",
           f"smallest d_top {d}, L~(1/2)={ce.l_tilde:.4f}, {elapsed:.2f}s")


def test_criterion_08_second_moment_decomposition():
    start = time.perf_counter()
    params = EnsembleParams(n=20, m=10, k=5, d_top=3, dv=3, dc_prime=6, seed=1)
    est = moment_experiment(params, D=0.2, trials=10_000, master_seed=2024)
    elapsed = time.perf_counter() - start
    ok = (est.within_se(3.0)
          and est.mean_T_squared >= est.mean_T ** 2
          and elapsed < 120.0)
    report(8, ok, "second-moment decomposition within 3 standard errors",
           f"E[T^2]={est.mean_T_squared:.4f} rhs={est.decomposition_rhs:.4f} "
           f"diff={est.diff:+.4f} 3se={3 * est.se_diff:.4f}, {elapsed:.1f}s")


def test_criterion_09_nested_partition():
    start = time.perf_counter()
    # Shape m=12, k1=4, k2=3; H drawn as sparse random rows (a regular
    # ensemble cannot realize 7 checks on 12 bits; the partition property
    # is linear algebra, independent of how H was sampled).
    rng = new_rng(5)
    code = CompoundCode(sample_ldgm(16, 12, 3, rng),
                        sample_ldgm(7, 12, 3, rng), k1=4)
    members_by_key = {}
    total = 0
    for y, _ in enumerate_codewords(code, "h1"):
        members_by_key.setdefault(matvec(code.H2, y).key(), set()).add(y.key())
        total += 1
    ok = True
    covered = 0
    for bits in itertools.product((0, 1), repeat=3):
        m_bits = BitVector.from_bits(bits)
        coset = coset_code(code, m_bits)
        if not coset.feasible:
            ok &= m_bits.key() not in members_by_key
            continue
        members = set()
        y = coset.y0
        members.add(y.key())
        for i in range(1, 1 << len(coset.basis)):
            j = (i & -i).bit_length() - 1
            y = y ^ coset.basis[j]
            members.add(y.key())
        ok &= members == members_by_key.get(m_bits.key(), set())
        ok &= not any(members & members_by_key[k]
                      for k in members_by_key if k != m_bits.key())
        covered += len(members)
    elapsed = time.perf_counter() - start
    ok &= covered == total and elapsed < 5.0
    report(9, ok, "nested partition: disjoint cosets cover null(H1)",
           f"{covered}/{total} info words, {elapsed:.2f}s")


def test_criterion_10_scsi_end_to_end():
    start = time.perf_counter()
    plan_ref = plan_rates_scsi(0.11, 0.03, 0.02, 1200)
    plan_ok = abs(plan_ref.r_trans - 0.08679) < 1 / 600

    params = EnsembleParams(n=24, m=16, k=12, d_top=4, dv=3, dc_prime=4, seed=7)
    code = assemble(params, k1=8)
    plan = plan_rates_scsi(0.11, 0.03, 0.02, 24, m=16, k1=8, k2=4)
    summary, traces = simulate_scsi(code, plan, 200, master_seed=77)
    again, _ = simulate_scsi(code, plan, 200, master_seed=77)
    elapsed = time.perf_counter() - start
    ok = (plan_ok and summary.trials == 200
          and summary.violation_count == 0
          and summary.to_dict() == again.to_dict()
          and elapsed < 120.0)
    report(10, ok, "SCSI: planner rate and desk-scale pipeline",
           f"k2/n={plan_ref.r_trans:.5f} vs 0.08679, recovery "
           f"{summary.recovery_rate:.3f}, mean distortion "
           f"{summary.mean_end_distortion}, {elapsed:.1f}s")


def test_criterion_11_ccsi_end_to_end():
    start = time.perf_counter()
    plan_ref = plan_rates_ccsi(0.25, 0.05, 0.0, 4000)
    analytic_ok = abs(plan_ref.analytic_gap - 0.52488) < 1e-5

    params = EnsembleParams(n=24, m=16, k=10, d_top=4, dv=5, dc_prime=8, seed=3)
    code = assemble(params, k1=6)
    plan = plan_rates_ccsi(0.25, 0.05, 0.02, 24, m=16, k1=6, k2=4)

    # Noiseless: every feasible message decodes exactly (batch + full sweep).
    plan0 = replace(plan, noise_p=0.0)
    noiseless, traces0 = simulate_ccsi(code, plan0, 200, master_seed=13)
    noiseless_ok = all(t.recovered for t in traces0
                       if t.status != "infeasible_message")
    rng = new_rng(99)
    for bits in itertools.product((0, 1), repeat=4):
        trace = run_ccsi(code, plan0, BitVector.from_bits(bits),
                         random_bitvector(24, rng), rng)
        if trace.status != "infeasible_message":
            noiseless_ok &= trace.recovered

    noisy, _ = simulate_ccsi(code, plan, 200, master_seed=14)
    elapsed = time.perf_counter() - start
    ok = (analytic_ok and noiseless_ok
          and noiseless.violation_count == 0 and noisy.violation_count == 0
          and 0.0 <= noisy.recovery_rate <= 1.0
          and elapsed < 120.0)
    report(11, ok, "CCSI: analytic branch and desk-scale pipeline",
           f"gap={plan_ref.analytic_gap:.5f}, noiseless recovery "
           f"{noiseless.recovery_rate:.3f}, noisy {noisy.recovery_rate:.3f}, "
           f"{elapsed:.1f}s")


def test_criterion_12_manifest_determinism(tmp_path):
    rc1 = cli_main(["simulate", "scsi", "--trials", "40", "--seed", "21",
                    "--threads", "1", "--out", str(tmp_path / "a")])
    rc4 = cli_main(["simulate", "scsi", "--trials", "40", "--seed", "21",
                    "--threads", "4", "--out", str(tmp_path / "b")])
    same_bytes = ((tmp_path / "a_summary.json").read_bytes()
                  == (tmp_path / "b_summary.json").read_bytes()
                  and (tmp_path / "a_trials.csv").read_bytes()
                  == (tmp_path / "b_trials.csv").read_bytes())
    rc_replay = cli_main(["replay", str(tmp_path / "a_manifest.json"),
                          "--out", str(tmp_path / "c")])
    manifest_a = json.loads((tmp_path / "a_manifest.json").read_text())
    digests_match = all(
        (tmp_path / ("c" + name[len("a"):])).exists()
        for name in manifest_a["outputs"])
    ok = rc1 == 0 and rc4 == 0 and rc_replay == 0 and same_bytes and digests_match
    report(12, ok, "manifest replay byte-identical at 1 and 4 threads",
           f"replay rc={rc_replay}")
