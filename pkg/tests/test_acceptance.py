"""Acceptance criteria, one test (and one PASS/FAIL line) per criterion.

Comparisons with the published tables use the two-significant-figure
column, i.e. the precision at which the tables were printed.
"""

import time

import numpy as np
import pytest

from qdteleport import cerf, metrics, protocol, qcore
from qdteleport.bathsim import CentralSpinModel, exact_channel, structure_report
from qdteleport.cli import sig2
from qdteleport.decoherence import cp_check, zero_field_params
from qdteleport.units import PhysicalConfig, from_ns

FIELDS = (1, 2, 3, 4, 5, 6)
EPS = 1e-9

PUBLISHED = {
    "I": ([0.72, 0.89, 0.94, 0.97, 0.98, 0.98], [13, 8.2, 5.7, 4.4, 3.5, 2.9]),
    "III": ([0.57, 0.72, 0.83, 0.89, 0.92, 0.94], [9.4, 6.8, 5.2, 4.1, 3.4, 2.9]),
    "IV": ([0.88, 0.96, 0.98, 0.99, 0.99, 0.99], [6.1, 4.0, 2.8, 2.2, 1.8, 1.5]),
    "V": ([0.73, 0.88, 0.94, 0.96, 0.98, 0.98], [16, 12, 8.5, 6.5, 5.4, 4.4]),
    "VI": ([0.53, 0.67, 0.79, 0.86, 0.90, 0.93], [31, 20.2, 14.2, 10.9, 8.8, 7.3]),
}
# 1 mT values for U_01 / U_10 in table V
PUBLISHED_V_ALT = (0.71, 19)


@pytest.fixture(scope="module")
def tables():
    out, times = {}, {}
    for which in PUBLISHED:
        start = time.perf_counter()
        out[which] = metrics.make_table(which, FIELDS)
        times[which] = time.perf_counter() - start
    out["_times"] = times
    return out


def compare(which, rows, value_tol, duration_tol, alt=False):
    failures = []
    values, durations = PUBLISHED[which]
    for row, pv, pd in zip(rows, values, durations):
        got_v = float(sig2(row.value_alt if alt else row.value))
        got_d = float(sig2(row.duration_alt_ns if alt else row.duration_ns))
        if alt and row.B0_mT == 1:
            pv, pd = PUBLISHED_V_ALT
        if abs(got_v - pv) > value_tol + EPS:
            failures.append(f"{row.B0_mT:g} mT value {got_v} vs {pv}")
        if abs(got_d - pd) > duration_tol + EPS:
            failures.append(f"{row.B0_mT:g} mT duration {got_d} vs {pd} ns")
    return failures


def test_criterion_01_table_I(tables, criterion):
    failures = compare("I", tables["I"], 0.01, 0.3)
    elapsed = tables["_times"]["I"]
    if elapsed >= 10:
        failures.append(f"runtime {elapsed:.1f} s")
    criterion(1, "table I gate fidelity / pi-pulse duration", failures, f"{elapsed:.2f} s")
    assert not failures


def test_criterion_02_table_III(tables, criterion):
    failures = compare("III", tables["III"], 0.01, 0.3)
    tau, tau_x = tables["III"][0].duration_ns, tables["I"][0].duration_ns
    if not tau < tau_x:
        failures.append(f"tau(1 mT) = {tau:.2f} not below tau_x(pi) = {tau_x:.2f}")
    criterion(2, "table III measured fidelity, tau < tau_x(pi) at 1 mT", failures)
    assert not failures


def test_criterion_03_table_IV(tables, criterion):
    failures = compare("IV", tables["IV"], 0.01, 0.3)
    for r1, r4 in zip(tables["I"], tables["IV"]):
        ratio = r1.duration_ns / r4.duration_ns
        if r1.B0_mT >= 2 and not 1.9 <= ratio <= 2.1:
            failures.append(f"{r1.B0_mT:g} mT duration ratio {ratio:.3f}")
    criterion(3, "table IV pi/2 gate fidelity, near-doubling of durations", failures)
    assert not failures


def test_criterion_04_table_V(tables, criterion):
    rows = tables["V"]
    failures = compare("V", rows, 0.01, 0.5) + compare("V", rows, 0.01, 0.5, alt=True)
    for r4, r5 in zip(tables["IV"], rows):
        cubed = r4.value**3
        for u in (r5.value, r5.value_alt):
            if r5.B0_mT == 1 and not u > cubed:
                failures.append(f"1 mT composite {u:.4f} not above cubed {cubed:.4f}")
            if r5.B0_mT >= 2 and abs(u - cubed) > 0.02:
                failures.append(f"{r5.B0_mT:g} mT |U - G^3| = {abs(u - cubed):.4f}")
    criterion(4, "table V composite fidelity incl. 1 mT dual values", failures)
    assert not failures


def test_criterion_05_table_VI(tables, criterion):
    rows = tables["VI"]
    failures = compare("VI", rows, 0.01, 0.5)
    for r in rows:
        if r.B0_mT >= 2 and not r.value > 2 / 3:
            failures.append(f"{r.B0_mT:g} mT Phi {r.value:.4f} not above 2/3")
        if r.B0_mT == 1 and not r.value < 2 / 3:
            failures.append(f"1 mT Phi {r.value:.4f} not below 2/3")
    for r, r3, r5 in zip(rows, tables["III"], tables["V"]):
        summed = r3.duration_ns + r5.duration_ns
        if abs(r.duration_ns - summed) > 0.5:
            failures.append(f"{r.B0_mT:g} mT tau_tot {r.duration_ns:.2f} vs tau + tau_com {summed:.2f}")
    criterion(5, "table VI teleportation fidelity / total duration", failures)
    assert not failures


def test_criterion_06_idle_point(criterion):
    z = zero_field_params(from_ns(0.18), 10**6)
    value = (2 + z.gamma - z.Z) / 3
    failures = [] if abs(value - 0.999907) <= 2e-6 else [f"got {value:.7f}"]
    criterion(6, "idle fidelity 0.999907 at 0.18 ns", failures, f"{value:.7f}")
    assert not failures


def test_criterion_07_closed_form_equivalence(criterion):
    start = time.perf_counter()
    worst = {}
    for B0 in FIELDS:
        lam = PhysicalConfig(B0_mT=B0).lam
        ts = np.linspace(0, 2 * np.pi / lam, 50)
        for kind in metrics.CLOSED_KINDS:
            closed = metrics.closed_form(kind, ts, lam)
            pipe = np.array([metrics.pipeline_average(kind, t, lam) for t in ts])
            worst[kind] = max(worst.get(kind, 0.0), float(np.abs(closed - pipe).max()))
    elapsed = time.perf_counter() - start
    failures = [f"{k} deviation {v:.2e}" for k, v in worst.items() if v > 1e-9]
    if elapsed >= 60:
        failures.append(f"runtime {elapsed:.1f} s")
    criterion(7, "closed forms equal 2-design pipeline averages", failures,
              f"max dev {max(worst.values()):.1e}, {elapsed:.1f} s")
    assert not failures


def test_criterion_08_oracle(criterion):
    failures = []
    for n in (2, 4, 8):
        for t in (0.3, 1.0, 2.5):
            rep = structure_report(exact_channel(CentralSpinModel(n, 0.0, t, "z")), "z")
            if rep["off_pattern_max"] > 1e-10:
                failures.append(f"N={n} t={t} off-pattern {rep['off_pattern_max']:.1e}")
    min_eig, worst_conj = np.inf, 0.0
    timings = {}
    for n in (8, 12):
        start = time.perf_counter()
        for lam, t in ((0.0, 1.0), (2.0, 0.6), (40.0, 0.08)):
            x = exact_channel(CentralSpinModel(n, lam, t, "x"))
            y = exact_channel(CentralSpinModel(n, lam, t, "y"))
            z = exact_channel(CentralSpinModel(n, lam, t, "z"))
            worst_conj = max(worst_conj, structure_report(x, "x", partner=y)["z_conjugation_deviation"])
            for ch in (x, y, z):
                min_eig = min(min_eig, min(cp_check(ch).choi_eigenvalues))
        timings[n] = time.perf_counter() - start
    start = time.perf_counter()
    dense = exact_channel(CentralSpinModel(8, 2.0, 0.6, "x"), "dense")
    timings["dense8"] = time.perf_counter() - start
    if not dense.allclose(exact_channel(CentralSpinModel(8, 2.0, 0.6, "x")), atol=1e-12):
        failures.append("dense and spin-sector routes disagree at N=8")
    if worst_conj > 1e-12:
        failures.append(f"y vs conjugated x {worst_conj:.1e}")
    if min_eig < -1e-10:
        failures.append(f"Choi eigenvalue {min_eig:.1e}")
    if timings[12] >= 300:
        failures.append(f"N=12 runtime {timings[12]:.1f} s")
    if max(timings[8], timings["dense8"]) >= 20:
        failures.append("N=8 runtime over 20 s")
    criterion(8, "exact small-bath oracle: pattern, y/x conjugation, CP", failures,
              f"conj dev {worst_conj:.1e}, min Choi {min_eig:.1e}, N=12 {timings[12]:.2f} s")
    assert not failures


def test_criterion_09_kernels(criterion):
    failures = []
    report = cerf.selftest()
    for name in ("erf", "faddeeva"):
        if report[name]["max_rel_error"] > 1e-10:
            failures.append(f"{name} rel error {report[name]['max_rel_error']:.1e}")
    a = np.linspace(0, 100, 401)
    for b in np.linspace(0, 30, 121):
        val = cerf.bracket_scaled(a, b)
        if not np.all(np.isfinite(val)):
            failures.append(f"bracket not finite at b={b}")
            break
    worst = 0.0
    N = 10**6
    for lam in np.linspace(500, 1e4, 40):
        t = np.linspace(0, 4 * np.pi / lam, 100)
        _, residue = cerf.bracket_scaled(t * np.sqrt(N / 8), np.sqrt(2 / N) * lam, return_residue=True)
        worst = max(worst, residue)
    if worst > 1e-9:
        failures.append(f"imaginary residue {worst:.1e}")
    criterion(9, "complex erf accuracy, bracket overflow-free, real W", failures,
              f"erf {report['erf']['max_rel_error']:.1e}, residue {worst:.1e}")
    assert not failures


def test_criterion_10_ideal_protocol(criterion):
    rng = np.random.default_rng(2024)
    worst_f, worst_p = 0.0, 0.0
    for theta, phi in zip(rng.uniform(0, np.pi, 50), rng.uniform(0, 2 * np.pi, 50)):
        psi = qcore.bloch_state(theta, phi)
        for o in protocol.run_ideal(theta, phi).record:
            worst_p = max(worst_p, abs(o.p - 0.25))
            rho = protocol.recover(o.sigma, o.jk, 0.0, 1.0, ideal=True)
            worst_f = max(worst_f, abs(qcore.fidelity(psi, rho) - 1))
    failures = []
    if worst_f > 1e-12:
        failures.append(f"fidelity off by {worst_f:.1e}")
    if worst_p > 1e-12:
        failures.append(f"p_jk off by {worst_p:.1e}")
    criterion(10, "ideal protocol: unit fidelity, p_jk = 1/4", failures)
    assert not failures
