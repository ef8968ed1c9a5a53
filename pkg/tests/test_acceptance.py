"""Acceptance run: one PASS/FAIL line per criterion, at the stated tolerances."""
import math
import time

import numpy as np
import pytest

from suturedtorus.config import make_model
from suturedtorus.contact import ContactFormModel, contact_grid, verify_contact_condition
from suturedtorus.flow import (
    FixedPointType,
    default_seeds,
    exactness_many,
    find_fixed_points,
    flow_quality,
    saddle_return_maps,
    verify_beta_XH_identity,
    verify_exact_symplectomorphism,
)
from suturedtorus.gluing import FAMILIES, construct_gluing_data, suture_count, verify_gluing
from suturedtorus.homology import (
    ch_monomials,
    cyl_rank_table,
    distinct_partition_count,
    ech_rank_table,
    rho,
)
from suturedtorus.verify import outer_samples, saddle_chart_samples, stable_saddle_samples


def report(capsys, number, title, ok, detail):
    with capsys.disabled():
        print(f"\n{'PASS' if ok else 'FAIL'} criterion {number} ({title}): {detail}")
    assert ok, detail


def test_criterion_1_ech_ranks(capsys):
    start = time.perf_counter()
    bad = []
    for n in range(2, 9):
        table = ech_rank_table(n, h_max=n + 2)
        for h in range(n + 3):
            expected = math.comb(n - 1, h) if h <= n - 1 else 0
            if table.rank(h) != expected:
                bad.append((n, h, table.rank(h), expected))
        if sum(table.rank(h) for h in range(n)) != 2 ** (n - 1):
            bad.append((n, "total"))
    elapsed = time.perf_counter() - start
    report(capsys, 1, "ECH ranks", not bad and elapsed < 1.0,
           f"n=2..8 binomial match, mismatches={bad}, {elapsed:.3f}s (< 1s)")


def test_criterion_2_cylindrical_ranks(capsys):
    start = time.perf_counter()
    bad = []
    for n in range(2, 9):
        table = cyl_rank_table(n, 20)
        if table.rank(0) != 0:
            bad.append((n, 0))
        bad += [(n, h) for h in range(1, 21) if table.rank(h) != n - 1]
    elapsed = time.perf_counter() - start
    report(capsys, 2, "cylindrical ranks", not bad and elapsed < 1.0,
           f"n=2..8, h=0..20, mismatches={bad}, {elapsed:.3f}s (< 1s)")


def test_criterion_3_contact_homology_ranks(capsys):
    start = time.perf_counter()
    bad = []
    for n in range(2, 6):
        for h in range(13):
            if rho(n, h) != len(ch_monomials(n, h)):
                bad.append((n, h))
    partitions = [distinct_partition_count(h) for h in range(13)]
    if [rho(2, h) for h in range(13)] != partitions:
        bad.append("rho(2, h) vs distinct partitions")
    elapsed = time.perf_counter() - start
    report(capsys, 3, "contact homology ranks", not bad and elapsed < 5.0,
           f"n=2..5, h=0..12 series = enumeration, q(0..12)={partitions}, "
           f"mismatches={bad}, {elapsed:.3f}s (< 5s)")


@pytest.fixture(scope="module")
def model3():
    return make_model({"n": 3})


def test_criterion_4_exactness_identities(capsys, model3):
    m = model3
    rng = np.random.default_rng(0)
    start = time.perf_counter()
    pts = np.concatenate([outer_samples(m, 1000, rng)]
                         + [saddle_chart_samples(m, 1000, rng, k=k) for k in range(1, m.n)])
    ident = verify_beta_XH_identity(m, pts)
    f_saddle, _ = exactness_many(m, m.saddle_centers, 1.0)
    outer = outer_samples(m, 400, rng, r_min=m.R)
    f_outer, res = exactness_many(m, outer, 1.0)
    stayed = np.array([r.stayed_in_chart for r in res])
    f_cert = np.abs(f_outer[stayed])[:100]
    elapsed = time.perf_counter() - start
    ok = (ident.max_defect < 1e-12 and len(ident.defects) == 1000 * m.n
          and np.max(np.abs(f_saddle)) < 1e-10
          and len(f_cert) == 100 and np.max(f_cert) < 1e-8 and elapsed < 10)
    report(capsys, 4, "exactness identities", ok,
           f"|beta(X_H)-H| max {ident.max_defect:.2e} on {len(ident.defects)} points (< 1e-12); "
           f"|f(p_k)| max {np.max(np.abs(f_saddle)):.2e} (< 1e-10); "
           f"|f| max {np.max(f_cert):.2e} on {len(f_cert)} certified outer samples (< 1e-8); "
           f"{elapsed:.2f}s (< 10s)")


def test_criterion_5_flow_quality(capsys, model3):
    m = model3
    rng = np.random.default_rng(1)
    pts = np.concatenate([outer_samples(m, 75, rng), stable_saddle_samples(m, 25, rng)])
    energy, area = flow_quality(m, pts)
    ok = len(pts) == 100 and energy.max() <= 1e-8 and area.max() <= 1e-8
    report(capsys, 5, "flow quality", ok,
           f"100 trajectories, max energy drift {energy.max():.2e}, "
           f"max |det - 1| {area.max():.2e} (both <= 1e-8)")


def test_criterion_6_return_maps(capsys):
    lines, ok = [], True
    for n in range(2, 7):
        m = make_model({"n": n})
        _, maps = saddle_return_maps(m)
        search = find_fixed_points(m, default_seeds(m))
        rel = max(r for _, _, r in maps)
        kinds = {p.classification for p in search}
        good = rel < 1e-6 and len(search) == n - 1 and kinds == {FixedPointType.POSITIVE_HYPERBOLIC}
        ok &= good
        lines.append(f"n={n}: rel {rel:.1e}, {len(search)} fixed points")
    report(capsys, 6, "return maps", ok,
           "; ".join(lines) + " (rel < 1e-6, count n-1, all PositiveHyperbolic)")


def test_criterion_7_pullback_invariance(capsys, model3):
    m = model3
    rng = np.random.default_rng(2)
    pts = np.concatenate([outer_samples(m, 150, rng, r_min=m.R), stable_saddle_samples(m, 50, rng)])
    rep = verify_exact_symplectomorphism(m, pts)
    ok = rep.max_defect < 1e-6 and len(rep.defects) + len(rep.excluded) == 200 and rep.passed
    report(capsys, 7, "pullback invariance", ok,
           f"max |phi^*beta - beta| {rep.max_defect:.2e} over {len(rep.defects)} samples "
           f"staying in S or V_k ({len(rep.excluded)} excluded), tolerance 1e-6")


def test_criterion_8_contact_condition(capsys, model3):
    m = model3
    ts, pts = contact_grid(m, 50, 20)
    rep = verify_contact_condition(ContactFormModel(m), ts, pts)
    # h vanishes on the model charts; the smoothing-disk stand-in exercises h != 0
    ts_p, pts_p = contact_grid(m, 50, 20, half_width=m.r_sing)
    rep_p = verify_contact_condition(ContactFormModel(m, source="proxy"), ts_p, pts_p)
    ok = True
    parts = []
    for label, r in (("model charts", rep), ("smoothing-disk stand-in", rep_p)):
        d = r.details
        ok &= (r.passed and d["min_density"] > 0 and d["reeb_spatial_max"] == 0.0
               and d["reeb_alpha_defect"] < 1e-10)
        parts.append(f"{label}: min density {d['min_density']:.3e}, max |h| {d['h_abs_max']:.2e}, "
                     f"Reeb spatial max {d.get('reeb_spatial_max')}, "
                     f"|alpha(R) - 1| {d.get('reeb_alpha_defect', float('nan')):.1e}, "
                     f"{d['skipped_plane_points']} plane points skipped")
    report(capsys, 8, "contact condition", ok,
           f"50x50x20 grids at eps={m.eps} (density > 0, alpha(R) within 1e-10): " + "; ".join(parts))


def test_criterion_9_gluing_data(capsys):
    lines, ok = [], True
    for n in range(2, 6):
        gd = construct_gluing_data(make_model({"n": n}))
        rep = verify_gluing(gd)
        count = suture_count(gd)
        ident = max(rep.details["identification_defect"].values())
        families = all(len(gd.arcs[f]) == n for f in FAMILIES)
        good = (rep.passed and families and rep.details["min_margin"] > 0
                and ident < 1e-6 and count == 2 * n)
        ok &= good
        lines.append(f"n={n}: sutures {count}, ident {ident:.1e}, min margin {rep.details['min_margin']:.2f}")
    report(capsys, 9, "gluing data", ok, "; ".join(lines))
