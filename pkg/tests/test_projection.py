import math

import numpy as np
import pytest
from scipy.spatial.distance import cdist

from emprobe.analysis.report import make_report
from emprobe.analysis.metrics import Metrics
from emprobe.plotting import plot_f1_bars, plot_ig_distribution, plot_projection
from emprobe.projection import (
    Projection2D,
    ProjectionError,
    TsneConfig,
    calibrate_affinities,
    joint_affinities,
    kl_divergence,
    kl_gradient,
    tsne_project,
    write_projection_csv,
)
from oracles import bisect_row

SHORT = TsneConfig(perplexity=5, iterations=120, exaggeration_iters=50, momentum_switch_iter=50)


def blobs(n=40, d=5, seed=0):
    rng = np.random.default_rng(seed)
    y = np.repeat([1, -1], n // 2)
    return rng.standard_normal((n, d)) + 4.0 * y[:, None] * (np.arange(d) == 0), y


def entropy_bits(row):
    row = row[row > 0]
    return float(-(row * np.log2(row)).sum())


class TestCalibrate:
    def test_equidistant_uniform(self):
        n = 6
        d2 = np.ones((n, n)) - np.eye(n)
        P = calibrate_affinities(d2, n - 1)
        off = P[~np.eye(n, dtype=bool)]
        assert np.allclose(off, 1 / (n - 1))

    def test_three_points_against_oracle(self):
        d2 = np.array([[0.0, 1.0, 9.0], [1.0, 0.0, 4.0], [9.0, 4.0, 0.0]])  # points 0, 1, 3 on a line
        P = calibrate_affinities(d2, 1.5)
        for i in range(3):
            others = [j for j in range(3) if j != i]
            want = bisect_row(d2[i, others], 1.5)
            assert np.allclose(P[i, others], want, atol=1e-4)
            assert abs(entropy_bits(P[i]) - math.log2(1.5)) <= 1e-5

    def test_rows_and_diagonal(self):
        x, _ = blobs(50)
        P = calibrate_affinities(cdist(x, x, "sqeuclidean"), 10)
        assert np.all(np.diag(P) == 0)
        assert np.allclose(P.sum(axis=1), 1, atol=1e-9)
        pj = joint_affinities(P)
        assert abs(pj.sum() - 1) <= 1e-9 and np.allclose(pj, pj.T)

    @pytest.mark.parametrize("d2,match", [
        (np.zeros((2, 2)), "at least 3"),
        (np.array([[0, 1, 2], [1, 0, 1], [3, 1, 0]], dtype=float), "symmetric"),
        (np.array([[1, 1, 1], [1, 0, 1], [1, 1, 0]], dtype=float), "diagonal"),
        (np.zeros((3, 4)), "square"),
    ])
    def test_input_errors(self, d2, match):
        with pytest.raises(ProjectionError, match=match):
            calibrate_affinities(d2, 1.5)

    def test_perplexity_range(self):
        with pytest.raises(ProjectionError, match="perplexity"):
            calibrate_affinities(np.ones((4, 4)) - np.eye(4), 3.5)


class TestGradient:
    def test_finite_differences(self):
        x, _ = blobs(30)
        pj = joint_affinities(calibrate_affinities(cdist(x, x, "sqeuclidean"), 8))
        Y = np.random.default_rng(2).standard_normal((30, 2))
        g = kl_gradient(pj, Y)
        num = np.zeros_like(Y)
        h = 1e-6
        for idx in np.ndindex(*Y.shape):
            up, down = Y.copy(), Y.copy()
            up[idx] += h
            down[idx] -= h
            num[idx] = (kl_divergence(pj, up) - kl_divergence(pj, down)) / (2 * h)
        assert np.linalg.norm(g - num) / np.linalg.norm(num) <= 1e-4


class TestProject:
    def test_deterministic_bytes(self, tmp_path):
        x, y = blobs()
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        write_projection_csv(a, tsne_project(x, SHORT), y)
        write_projection_csv(b, tsne_project(x, SHORT), y)
        assert a.read_bytes() == b.read_bytes()

    def test_seed_matters(self):
        x, _ = blobs()
        other = TsneConfig(**{**SHORT.__dict__, "seed": 1})
        assert not np.array_equal(tsne_project(x, SHORT).coords, tsne_project(x, other).coords)

    def test_centered_and_finite(self):
        x, _ = blobs()
        p = tsne_project(x, SHORT)
        assert p.coords.shape == (40, 2)
        assert np.allclose(p.coords.mean(axis=0), 0, atol=1e-10)
        assert len(p.kl_trace) == SHORT.iterations + 1

    def test_separates_blobs(self):
        x, y = blobs()
        c = tsne_project(x, SHORT).coords
        d = cdist(c, c)
        np.fill_diagonal(d, np.inf)
        assert np.mean(y[d.argmin(axis=1)] == y) >= 0.95

    def test_permutation_equivariant(self):
        x, _ = blobs()
        ids = [f"m{i:03d}" for i in range(40)]
        perm = np.random.default_rng(1).permutation(40)
        a = tsne_project(x, SHORT, ids)
        b = tsne_project(x[perm], SHORT, [ids[i] for i in perm])
        assert np.array_equal(a.coords[perm], b.coords)

    def test_equilateral(self):
        x = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3) / 2]])
        c = tsne_project(x, TsneConfig(perplexity=2)).coords
        d = [np.linalg.norm(c[i] - c[j]) for i, j in ((0, 1), (0, 2), (1, 2))]
        assert max(d) / min(d) <= 1.05

    def test_kl_after_exaggeration(self):
        x, _ = blobs()
        cfg = TsneConfig(perplexity=5, iterations=300, exaggeration_iters=100)
        trace = tsne_project(x, cfg).kl_trace
        assert math.isfinite(trace[-1]) and trace[-1] <= trace[cfg.exaggeration_iters]

    def test_config_errors(self):
        with pytest.raises(ProjectionError, match="perplexity"):
            TsneConfig(perplexity=1.0)
        with pytest.raises(ProjectionError, match="iterations"):
            TsneConfig(iterations=0)
        with pytest.raises(ProjectionError, match="ids"):
            tsne_project(np.zeros((3, 2)), SHORT, ["a", "a", "b"])

    def test_non_finite_rejected(self):
        with pytest.raises(ProjectionError, match="non-finite"):
            Projection2D(["a"], np.array([[np.nan, 0.0]]))


class TestPlots:
    def test_byte_identical_svgs(self, tmp_path):
        x, y = blobs(20)
        proj = tsne_project(x, TsneConfig(perplexity=4, iterations=60, exaggeration_iters=20,
                                          momentum_switch_iter=20))
        table = make_report([("equals", "HC_Binary", Metrics(1, 0.9, 0.8, 0.85)),
                             ("equals", "code2vec", Metrics(1, 0.95, 0.9, 0.92))])
        for name, draw in (("p", lambda path: plot_projection(path, proj, y, "t")),
                           ("ig", lambda path: plot_ig_distribution(path, np.linspace(0, 1, 12))),
                           ("f1", lambda path: plot_f1_bars(path, table))):
            a, b = draw(tmp_path / f"{name}1.svg"), draw(tmp_path / f"{name}2.svg")
            assert a.read_bytes() == b.read_bytes()
            assert b"<svg" in a.read_bytes()

    def test_projection_colors(self, tmp_path):
        proj = Projection2D(["a", "b"], np.array([[0.0, 0.0], [1.0, 1.0]]))
        svg = plot_projection(tmp_path / "s.svg", proj, [1, -1]).read_text()
        assert "#2ca02c" in svg and "#d62728" in svg

    def test_png(self, tmp_path):
        p = plot_ig_distribution(tmp_path / "ig.png", [0.3, 0.1], threshold_fraction=None)
        assert p.read_bytes()[:4] == b"\x89PNG"
