"""Basin scans: candidate derivation, grid labeling, summaries, determinism."""

from fractions import Fraction

import pytest

from pcflab import catalog, fatou, pcf, projmap

import property_suites as ps


def _squaring_p2():
    return catalog.get("squaring-p2").map


def _graph_and_tower(m):
    graph, verdict = pcf.postcritical_graph(m)
    assert verdict.ok
    tower = pcf.build_tower(m, graph)
    return graph, tower


COORD_CANDS = ((1, 0, 0), (0, 1, 0), (0, 0, 1))


class TestSuperattractingCandidates:
    def test_squaring_p2_coordinate_points(self):
        m = _squaring_p2()
        graph, tower = _graph_and_tower(m)
        cands = fatou.superattracting_candidates(m, graph, tower)
        as_ints = {tuple(int(x) for x in c) for c in cands}
        assert as_ints == {(1, 0, 0), (0, 1, 0), (0, 0, 1)}

    def test_squaring_p1_both_points(self):
        m = catalog.get("squaring-p1").map
        graph, tower = _graph_and_tower(m)
        cands = fatou.superattracting_candidates(m, graph, tower)
        as_ints = {tuple(int(x) for x in c) for c in cands}
        assert as_ints == {(0, 1), (1, 0)}

    def test_fs_has_none(self):
        # The three-line cycle is repelling along the lines, so no
        # post-critical intersection point survives the nilpotency filter.
        m = catalog.get("fs-1992-a").map
        graph, tower = _graph_and_tower(m)
        assert fatou.superattracting_candidates(m, graph, tower) == []


class TestScanConfig:
    def test_resolution_floor(self):
        with pytest.raises(fatou.FatouError):
            fatou.ScanConfig(2, (0, 0), 0.5, 1)

    def test_positive_tolerance(self):
        with pytest.raises(fatou.FatouError):
            fatou.ScanConfig(2, (0, 0), 0.5, 4, tol=0.0)

    def test_chart_range_checked_at_scan(self):
        cfg = fatou.ScanConfig(7, (0, 0), 0.5, 4, candidates=COORD_CANDS)
        with pytest.raises(fatou.FatouError):
            fatou.scan(_squaring_p2(), cfg)

    def test_zero_candidate_rejected(self):
        cfg = fatou.ScanConfig(2, (0, 0), 0.5, 4, candidates=((0, 0, 0),))
        with pytest.raises(fatou.FatouError):
            fatou.scan(_squaring_p2(), cfg)


class TestScanWindows:
    def test_origin_window_all_to_z(self):
        m = _squaring_p2()
        cfg = fatou.ScanConfig(2, (0, 0), 0.9, 16, candidates=COORD_CANDS)
        grid = fatou.scan(m, cfg)
        summary = fatou.basin_summary(grid)
        assert summary.fractions[2] == 1.0
        assert summary.nonconverged_fraction == 0.0
        assert summary.decay_fraction == 1.0
        assert summary.consistency == "CONSISTENT"
        assert summary.finding_pixels == 0
        assert grid.failures == 0

    def test_outer_window_all_to_x(self):
        m = _squaring_p2()
        cfg = fatou.ScanConfig(2, (2, 0.5), 0.2, 16, candidates=COORD_CANDS)
        grid = fatou.scan(m, cfg)
        summary = fatou.basin_summary(grid)
        assert summary.fractions[0] == 1.0
        assert summary.nonconverged_fraction == 0.0
        assert summary.consistency == "CONSISTENT"

    def test_repelling_fixed_point_stays_unlabeled(self):
        # Radius 0 pins every pixel to (1:1:1), which never converges to a
        # candidate and never shows derivative decay, so the grid reports
        # settled, unlabeled, CONSISTENT.
        m = _squaring_p2()
        cfg = fatou.ScanConfig(2, (1, 1), 0.0, 2, candidates=COORD_CANDS)
        grid = fatou.scan(m, cfg)
        assert all(lab == -1 for row in grid.labels for lab in row)
        assert all(s for row in grid.settled for s in row)
        assert not any(d for row in grid.decayed for d in row)
        summary = fatou.basin_summary(grid)
        assert summary.consistency == "CONSISTENT"
        assert summary.nonconverged_fraction == 1.0

    def test_radius_zero_is_one_orbit(self):
        m = _squaring_p2()
        cfg = fatou.ScanConfig(2, (0.25, 0.125), 0.0, 3, candidates=COORD_CANDS)
        grid = fatou.scan(m, cfg)
        first_label = grid.labels[0][0]
        first_iter = grid.iters[0][0]
        assert all(lab == first_label for row in grid.labels for lab in row)
        assert all(it == first_iter for row in grid.iters for it in row)

    def test_label_soundness_by_reiteration(self):
        # Independent check: push each labeled pixel's starting point with
        # the exact-map evaluator and confirm it approaches its candidate.
        m = _squaring_p2()
        cfg = fatou.ScanConfig(2, (0.3, -0.2), 0.5, 8, candidates=COORD_CANDS)
        grid = fatou.scan(m, cfg)
        origins = fatou._pixel_origin(cfg, m.k)
        import mpmath
        with mpmath.workprec(64):
            for row in range(cfg.resolution):
                for col in range(cfg.resolution):
                    lab = grid.labels[row][col]
                    if lab < 0:
                        continue
                    pt = origins[row][col]
                    final = projmap.orbit(m, pt, cfg.max_iters, 64)[-1]
                    cand = tuple(mpmath.mpc(v) for v in cfg.candidates[lab])
                    from pcflab import numeric
                    dist = numeric.proj_distance(
                        final, numeric.normalize_point(cand)[0])
                    assert dist < cfg.tol


class TestDeterminism:
    def test_identical_reruns(self):
        m = _squaring_p2()
        cfg = fatou.ScanConfig(0, (0.1 + 0.2j, -0.3), 0.7, 12,
                               max_iters=40, candidates=COORD_CANDS)
        a = fatou.scan(m, cfg)
        b = fatou.scan(m, cfg)
        assert a.labels == b.labels
        assert a.iters == b.iters
        assert a.decayed == b.decayed
        assert a.settled == b.settled
        assert a.failures == b.failures

    def test_randomized_determinism_suite(self):
        assert ps.suite_scan_determinism(n=60) == 60


class TestBasinSummary:
    def test_fraction_bookkeeping(self):
        m = _squaring_p2()
        cfg = fatou.ScanConfig(2, (0, 0), 0.9, 8, candidates=COORD_CANDS)
        grid = fatou.scan(m, cfg)
        summary = fatou.basin_summary(grid)
        assert len(summary.fractions) == 3
        assert abs(sum(summary.fractions)
                   + summary.nonconverged_fraction - 1.0) < 1e-12
        assert summary.failures == 0
