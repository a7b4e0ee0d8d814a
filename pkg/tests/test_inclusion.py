"""Tests for family-level convergence analysis.

Expected verdicts for the named families are frozen from hand derivations:
kernels and decomposition blocks are computed symbolically in the comments,
and certificate checks go through verify_lmi rather than the solver.
"""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from polyconv.errors import InputError
from polyconv.feasibility import verify_lmi
from polyconv.inclusion import (
    MatrixFamily,
    StrongCertificate,
    analyze,
    common_fixed_kernel,
    convergence_rate,
    cqlf_stability,
    dual_family,
    euler_family,
    ksp_check,
    strong_decompose,
    strong_lmi,
    verify_polyhedral_strong,
    weak_lmi,
)
from polyconv.lti import DISPROVEN, EPS_GRID, ETA_GRID, PROVEN, UNKNOWN

A11 = MatrixFamily("dt", [[[0.5, 0], [1, 1]], [[0.75, 0], [1, 1]]])
HALF_ONE = MatrixFamily("dt", [[[0.5]], [[1.0]]])
PM_ONE = MatrixFamily("dt", [[[-1.0]], [[1.0]]])
DT_DUALITY = MatrixFamily("dt", [[[0.5, 1], [0, 1]], [[0.5, 2], [0, 1]]])
CT_DUALITY = MatrixFamily("ct", [[[-1, 2], [1, -2]], [[-2, 1], [2, -1]]])
DIAG_KERNELS = MatrixFamily("ct", [[[-1, 0], [0, 0]], [[0, 0], [0, -1]]])
SPIKE = MatrixFamily("ct", [[[0.0]], [[-1.0]]])
PATH_CONSENSUS = MatrixFamily("ct", [[[-1, 1], [0, 0]], [[0, 0], [1, -1]]])


class TestKernelAndKsp:
    def test_a11_shares_e2(self):
        ker = common_fixed_kernel(A11)
        assert ker.dim == 1
        assert ker.distance(np.array([0.0, 1.0])) < 1e-12
        res = ksp_check(A11)
        assert res.holds
        assert res.kernel_dims == (1, 1)
        assert res.common_dim == 1

    def test_duality_kernels_differ(self):
        # ker(A1 - I) = span (2, 1), ker(A2 - I) = span (4, 1)
        res = ksp_check(DT_DUALITY)
        assert not res.holds
        assert res.kernel_dims == (1, 1)
        assert res.common_dim == 0

    def test_diag_kernels_differ(self):
        res = ksp_check(DIAG_KERNELS)
        assert not res.holds
        assert res.common_dim == 0

    def test_spike_dims(self):
        res = ksp_check(SPIKE)
        assert not res.holds
        assert res.kernel_dims == (1, 0)

    def test_path_consensus_agreement_line(self):
        ker = common_fixed_kernel(PATH_CONSENSUS)
        assert ker.dim == 1
        assert ker.distance(np.array([1.0, 1.0]) / np.sqrt(2)) < 1e-12
        assert ksp_check(PATH_CONSENSUS).holds

    def test_identity_family_full_kernel(self):
        fam = MatrixFamily("dt", [np.eye(3)])
        assert common_fixed_kernel(fam).dim == 3


class TestStrongDecompose:
    def test_a11_blocks(self):
        dec = strong_decompose(A11)
        assert dec.m == 1
        assert np.allclose(dec.a_as[0], [[0.5]])
        assert np.allclose(dec.a_as[1], [[0.75]])
        # coupling row is the (2,1) entry of either vertex
        assert abs(abs(dec.a_r[0][0, 0]) - 1.0) < 1e-12
        assert dec.residual < 1e-12

    def test_path_consensus_blocks(self):
        dec = strong_decompose(PATH_CONSENSUS)
        assert dec.m == 1
        assert np.allclose(dec.a_as[0], [[-1.0]])
        assert np.allclose(dec.a_as[1], [[-1.0]])

    def test_requires_shared_kernel(self):
        with pytest.raises(InputError, match="shared kernel"):
            strong_decompose(DT_DUALITY)


class TestCqlf:
    def test_dt_scalar_blocks(self):
        out = cqlf_stability([[[0.5]], [[0.75]]], "dt")
        assert out.feasible
        assert verify_lmi(out.problem, out.result.values)["pass"]

    def test_ct_blocks(self):
        out = cqlf_stability([[[-1.0]], [[-1.0]]], "ct")
        assert out.feasible

    def test_unstable_dt_infeasible(self):
        assert not cqlf_stability([[[1.1]]], "dt").feasible

    def test_zero_matrix_not_hurwitz(self):
        assert not cqlf_stability([[[0.0]]], "ct").feasible

    def test_empty_blocks_trivially_feasible(self):
        out = cqlf_stability([np.zeros((0, 0))], "ct")
        assert out.feasible
        assert out.result.values["P"].shape == (0, 0)

    def test_size_mismatch_rejected(self):
        with pytest.raises(InputError):
            cqlf_stability([np.eye(2), np.eye(3)], "dt")
        with pytest.raises(InputError):
            cqlf_stability([], "dt")

    @settings(max_examples=20, deadline=None)
    @given(arrays(np.float64, (3, 3), elements=st.floats(-1, 1)))
    def test_dissipative_ct_always_feasible(self, w):
        # A + A' < 0 by construction, so P = I certifies decay
        a = w - (np.linalg.norm(w, 2) + 0.1) * np.eye(3)
        out = cqlf_stability([a], "ct")
        assert out.feasible
        assert verify_lmi(out.problem, out.result.values)["pass"]


class TestStrongLmi:
    def test_a11_feasible_and_verified(self):
        out = strong_lmi(A11)
        assert out.feasible
        assert verify_lmi(out.problem, out.result.values)["pass"]

    def test_path_consensus_feasible(self):
        out = strong_lmi(PATH_CONSENSUS)
        assert out.feasible
        assert verify_lmi(out.problem, out.result.values)["pass"]

    def test_defective_vertex_infeasible(self):
        fam = MatrixFamily("dt", [[[1, 1], [0, 1]]])
        assert not strong_lmi(fam).feasible

    def test_requires_shared_kernel(self):
        with pytest.raises(InputError, match="shared kernel"):
            strong_lmi(HALF_ONE)


class TestWeakLmi:
    def test_half_one_smallest_eta(self):
        # vertex 0.5 needs eta >= 0.25, vertex 1 is identically zero,
        # so the smallest grid value already works
        cert = weak_lmi(HALF_ONE)
        assert cert is not None
        assert cert.parameter == ETA_GRID[0]
        assert verify_lmi(cert.problem, {"P": cert.p})["pass"]

    def test_pm_one_infeasible(self):
        # vertex -1 forces 4 (1 - eta) P <= 0 against P > 0
        assert weak_lmi(PM_ONE) is None

    def test_dt_duality_infeasible(self):
        assert weak_lmi(DT_DUALITY) is None

    def test_ct_duality_infeasible(self):
        assert weak_lmi(CT_DUALITY) is None

    def test_diag_kernels_feasible(self):
        cert = weak_lmi(DIAG_KERNELS)
        assert cert is not None
        assert cert.parameter == EPS_GRID[-1]
        assert verify_lmi(cert.problem, {"P": cert.p})["pass"]

    def test_spike_feasible(self):
        assert weak_lmi(SPIKE) is not None

    def test_explicit_parameter(self):
        assert weak_lmi(DIAG_KERNELS, parameter=1e-2) is not None
        assert weak_lmi(PM_ONE, parameter=0.9) is None


class TestVerifyPolyhedralStrong:
    def test_a11_identity_candidate(self):
        # kernel column e2 maps to itself; off-kernel entries are the
        # contraction factors 0.5 and 0.75
        rep = verify_polyhedral_strong(A11, np.eye(2))
        assert rep["pass"]
        assert rep["as_norms"] == pytest.approx([0.5, 0.75])

    def test_path_consensus_candidate(self):
        # columns: agreement direction (1,1), disagreement (1,-1);
        # A_i X = X P_i with P_i = [[0, -1], [0, -1]] or [[0, 1], [0, -1]]
        x = np.array([[1.0, 1.0], [1.0, -1.0]])
        rep = verify_polyhedral_strong(PATH_CONSENSUS, x)
        assert rep["pass"]
        assert rep["as_norms"] == pytest.approx([-1.0, -1.0])
        assert max(rep["residuals"]) < 1e-12

    def test_neutral_vertex_fails_norm(self):
        rep = verify_polyhedral_strong(HALF_ONE, np.array([[1.0]]))
        assert not rep["pass"]
        assert any("1-norm" in r for r in rep["reasons"])

    def test_rotation_fails_norm(self):
        c, s = np.cos(np.pi / 4), np.sin(np.pi / 4)
        fam = MatrixFamily("dt", [[[c, -s], [s, c]]])
        rep = verify_polyhedral_strong(fam, np.eye(2))
        assert not rep["pass"]

    def test_scaled_kernel_column_accepted(self):
        rep = verify_polyhedral_strong(A11, np.array([[1.0, 0.0],
                                                      [0.0, 5.0]]))
        assert rep["pass"]

    def test_rank_deficient_candidate_rejected(self):
        with pytest.raises(InputError, match="full row rank"):
            verify_polyhedral_strong(A11, np.array([[1.0, 2.0],
                                                    [2.0, 4.0]]))

    def test_row_count_mismatch_rejected(self):
        with pytest.raises(InputError):
            verify_polyhedral_strong(A11, np.eye(3))


class TestEulerAndDual:
    def test_euler_family_matrices(self):
        fam = euler_family(PATH_CONSENSUS, 0.1)
        assert fam.mode == "dt"
        assert np.allclose(fam.matrices[0],
                           np.eye(2) + 0.1 * np.asarray(
                               PATH_CONSENSUS.matrices[0]))
        assert fam.metadata["tau"] == 0.1

    def test_euler_rejects_dt_and_bad_tau(self):
        with pytest.raises(InputError):
            euler_family(A11, 0.1)
        with pytest.raises(InputError):
            euler_family(PATH_CONSENSUS, 0.0)

    def test_dual_family_transposes(self):
        dual = dual_family(CT_DUALITY)
        assert dual.mode == "ct"
        for a, b in zip(dual.matrices, CT_DUALITY.matrices):
            assert np.allclose(a, np.asarray(b).T)


class TestAnalyzeCatalogue:
    def test_a11_strong_with_rate(self):
        rep = analyze(A11)
        assert rep.strong.status == PROVEN
        assert rep.strong.method == "decomposition-cqlf"
        assert rep.weak.status == PROVEN
        assert rep.rate is not None
        assert abs(rep.rate.beta + np.log(0.75)) < 1e-9
        assert rep.rate.c0 == pytest.approx(1.0)
        assert rep.rate.c1 == pytest.approx(1.0)

    def test_half_one_weak_only(self):
        rep = analyze(HALF_ONE)
        assert rep.strong.status == DISPROVEN
        assert rep.strong.method == "kernel-mismatch"
        assert rep.weak.status == PROVEN
        assert rep.weak.method == "weak-lmi"
        assert rep.weak_certificate.parameter == ETA_GRID[0]

    def test_pm_one_vertex_disproof(self):
        rep = analyze(PM_ONE)
        assert rep.strong.status == DISPROVEN
        assert rep.weak.status == DISPROVEN
        assert rep.strong.method == "vertex"

    def test_rotation_vertex_disproof(self):
        c, s = np.cos(np.pi / 4), np.sin(np.pi / 4)
        rep = analyze(MatrixFamily("dt", [[[c, -s], [s, c]]]))
        assert rep.weak.status == DISPROVEN
        assert rep.weak.method == "vertex"

    def test_dt_duality_witness(self):
        rep = analyze(DT_DUALITY)
        assert rep.strong.status == DISPROVEN
        assert rep.strong.method == "kernel-mismatch"
        assert rep.weak.status == DISPROVEN
        assert rep.weak.method == "periodic-orbit"
        assert rep.witness is not None
        assert rep.witness["separation"] > 1e-3

    def test_ct_duality_witness(self):
        rep = analyze(CT_DUALITY)
        assert rep.weak.status == DISPROVEN
        assert rep.weak.method == "periodic-orbit"
        assert rep.witness is not None

    def test_diag_kernels_weak_only(self):
        rep = analyze(DIAG_KERNELS)
        assert rep.strong.status == DISPROVEN
        assert rep.weak.status == PROVEN
        assert rep.weak_certificate.parameter == EPS_GRID[-1]

    def test_spike_weak_only(self):
        rep = analyze(SPIKE)
        assert rep.strong.status == DISPROVEN
        assert rep.weak.status == PROVEN

    def test_path_consensus_unit_rate(self):
        rep = analyze(PATH_CONSENSUS)
        assert rep.strong.status == PROVEN
        assert rep.weak.status == PROVEN
        assert abs(rep.rate.beta - 1.0) < 1e-9
        assert rep.rate.bound(0.0) == pytest.approx(1.0)

    def test_single_matrix_reduces_to_lti(self):
        rep = analyze(MatrixFamily("dt", [[[0.5, 0], [1, 1]]]))
        assert rep.strong.status == PROVEN
        assert rep.weak.status == PROVEN
        assert abs(rep.rate.beta + np.log(0.5)) < 1e-9

    def test_identity_family_all_kernel(self):
        rep = analyze(MatrixFamily("dt", [np.eye(2)]))
        assert rep.strong.status == PROVEN
        assert rep.rate is None

    def test_witness_search_can_be_disabled(self):
        rep = analyze(DT_DUALITY, search_witness=False)
        assert rep.weak.status == UNKNOWN
        assert rep.weak.method == "exhausted"
        assert rep.strong.status == DISPROVEN

    def test_tolerance_band_family_stays_unknown(self):
        # 1 + 1e-9 diverges, but its LMI violation (2e-9) sits below the
        # solver residual tolerance; the band cap keeps this honest
        rep = analyze(MatrixFamily("dt", [[[1.0 + 1e-9]]]))
        assert rep.strong.status == UNKNOWN
        assert rep.strong.method == "vertex-band"
        assert rep.weak.status == UNKNOWN
        assert rep.rate is None
        assert rep.diagnostics["vertices_in_tolerance_band"] == [1]


class TestConvergenceRate:
    def test_hurwitz_singleton_rate_two(self):
        fam = MatrixFamily("ct", [[[-2.0]]])
        rep = analyze(fam)
        assert abs(rep.rate.beta - 2.0) < 1e-9
        assert rep.rate.c1 == 0.0
        assert rep.rate.c0 == pytest.approx(1.0)

    def test_requires_cqlf_evidence(self):
        dec = strong_decompose(A11)
        cert = StrongCertificate("dt", dec.kernel, dec, lmi=strong_lmi(A11))
        with pytest.raises(InputError, match="common-Lyapunov"):
            convergence_rate(A11, cert)


class TestAnalyzeProperties:
    @settings(max_examples=15, deadline=None)
    @given(st.integers(0, 10_000), st.integers(2, 3), st.integers(1, 3))
    def test_norm_contractions_proven(self, seed, n, m):
        rng = np.random.default_rng(seed)
        mats = []
        for _ in range(m):
            w = rng.normal(size=(n, n))
            mats.append(0.9 * w / np.linalg.norm(w, 2))
        rep = analyze(MatrixFamily("dt", mats))
        assert rep.strong.status == PROVEN
        assert rep.weak.status == PROVEN
        cq = rep.strong_certificate.cqlf
        assert verify_lmi(cq.problem, cq.result.values)["pass"]
        assert rep.rate.beta > 0

    @settings(max_examples=10, deadline=None)
    @given(st.integers(0, 10_000), st.sampled_from(["dt", "ct"]))
    def test_verdict_lattice(self, seed, mode):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 4))
        m = int(rng.integers(1, 4))
        fam = MatrixFamily(mode, rng.uniform(-1.5, 1.5, size=(m, n, n)))
        rep = analyze(fam)
        assert rep.strong.status in (PROVEN, DISPROVEN, UNKNOWN)
        assert rep.weak.status in (PROVEN, DISPROVEN, UNKNOWN)
        if rep.strong.status == PROVEN:
            assert rep.weak.status == PROVEN
        if rep.weak.status == DISPROVEN:
            assert rep.strong.status == DISPROVEN
        if not rep.ksp.holds:
            assert rep.strong.status == DISPROVEN
