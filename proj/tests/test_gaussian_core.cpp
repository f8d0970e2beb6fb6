#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ngsim/errors.hpp"
#include "ngsim/fock.hpp"
#include "ngsim/gaussian.hpp"
#include "ngsim/symplectic.hpp"
#include "support.hpp"

using namespace ngs;

namespace {

GaussianMixed two_mode_squeezed(double r) {
    Circuit c{Gate::squeeze(0, r), Gate::squeeze(1, -r), Gate::beamsplitter(0, 1, M_PI / 4, 0.0)};
    return apply_symplectic(GaussianMixed::vacuum(2), circuit_unitary(c, 2).S);
}

Vec vec2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

}  // namespace

TEST(Displace, VacuumZeroShiftIsVacuum) {
    GaussianMixed out = displace(GaussianMixed::vacuum(1), Vec::Zero(2));
    EXPECT_TRUE(out.mean.isZero(0.0));
    EXPECT_TRUE(out.cov.isIdentity(0.0));
}

TEST(Displace, VacuumToCoherent) {
    GaussianMixed out = displace(GaussianMixed::vacuum(1), vec2(std::sqrt(2.0), 0.0));
    EXPECT_NEAR(out.mean(0), std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(out.mean(1), 0.0, 1e-15);
    EXPECT_TRUE(out.cov.isIdentity(1e-15));
    EXPECT_TRUE(out.mean.isApprox(GaussianPure::coherent(1.0).mean(), 1e-14));
    FockVector psi = oracle_state(1, {Gate::displace(0, 1.0)}, 40);
    EXPECT_NEAR(std::abs(psi.at({1})), std::exp(-0.5), 1e-12);
}

TEST(Displace, InverseShift) {
    GaussianMixed coh = GaussianPure::coherent(1.0).mixed();
    GaussianMixed out = displace(coh, vec2(-std::sqrt(2.0), 0.0));
    EXPECT_LT(out.mean.norm(), 1e-15);
}

TEST(ApplySymplectic, IdentityAndSqueeze) {
    GaussianMixed vac = GaussianMixed::vacuum(1);
    EXPECT_TRUE(apply_symplectic(vac, Mat::Identity(2, 2)).cov.isIdentity(0.0));
    double z = std::sqrt(3.0);
    Mat S = Mat::Zero(2, 2);
    S(0, 0) = z;
    S(1, 1) = 1.0 / z;
    GaussianMixed sq = apply_symplectic(vac, S);
    EXPECT_NEAR(sq.cov(0, 0), 3.0, 1e-14);
    EXPECT_NEAR(sq.cov(1, 1), 1.0 / 3.0, 1e-14);
}

TEST(ApplySymplectic, BeamsplitterFixesVacuum) {
    Mat S = GaussianUnitary::beamsplitter(2, 0, 1, M_PI / 4, 0.0).S;
    EXPECT_TRUE(apply_symplectic(GaussianMixed::vacuum(2), S).cov.isIdentity(1e-14));
}

TEST(ApplySymplectic, RejectsNonSymplectic) {
    Mat S = Mat::Identity(2, 2) * 2.0;
    EXPECT_THROW(apply_symplectic(GaussianMixed::vacuum(1), S), ValidationError);
}

TEST(BlochMessiah, CanonicalInput) {
    Mat S = Mat::Zero(2, 2);
    S(0, 0) = 2.0;
    S(1, 1) = 0.5;
    BlochMessiahResult bm = bloch_messiah(S);
    EXPECT_TRUE((bm.O1 * bm.Z * bm.O2).isApprox(S, 1e-12));
    EXPECT_NEAR(bm.Z(0, 0) * bm.Z(1, 1), 1.0, 1e-12);
    EXPECT_NEAR(std::max(bm.Z(0, 0), bm.Z(1, 1)), 2.0, 1e-12);
}

TEST(BlochMessiah, OrthogonalHasUnitZ) {
    Mat O = GaussianUnitary::beamsplitter(2, 0, 1, 0.4, 1.1).S;
    BlochMessiahResult bm = bloch_messiah(O);
    EXPECT_TRUE(bm.Z.isIdentity(1e-10));
}

TEST(BlochMessiah, RandomTwoModeRoundTrip) {
    std::mt19937_64 eng(11);
    for (int trial = 0; trial < 20; trial++) {
        Mat S = circuit_unitary(ngs::testing::random_circuit(eng, 12, 0.5, 0.8), 2).S;
        BlochMessiahResult bm = bloch_messiah(S);
        EXPECT_LE((bm.O1 * bm.Z * bm.O2 - S).norm(), 1e-10);
        EXPECT_TRUE(is_symplectic(bm.O1));
        EXPECT_TRUE(is_symplectic(bm.O2));
        EXPECT_TRUE((bm.O1 * bm.O1.transpose()).isIdentity(1e-10));
        EXPECT_TRUE((bm.O2 * bm.O2.transpose()).isIdentity(1e-10));
    }
}

TEST(Passive, IdentityAndPhase) {
    EXPECT_TRUE(passive_from_unitary(CMat::Identity(1, 1)).isIdentity(0.0));
    double th = 0.7;
    CMat U(1, 1);
    U(0, 0) = std::polar(1.0, th);
    Mat O = passive_from_unitary(U);
    EXPECT_TRUE(O.isApprox(rotation_matrix(th), 1e-14));
    cplx a(0.8, -0.3);
    Vec rotated = O * GaussianPure::coherent(a).mean();
    EXPECT_TRUE(rotated.isApprox(GaussianPure::coherent(std::polar(1.0, th) * a).mean(), 1e-14));
}

TEST(Passive, BalancedBeamsplitterMatchesOracle) {
    CMat W = beamsplitter_unitary(M_PI / 4, 0.0);
    EXPECT_NEAR(std::abs(W(0, 0)), 1.0 / std::sqrt(2.0), 1e-15);
    Mat O = passive_from_unitary(W);
    EXPECT_TRUE(O.isApprox(GaussianUnitary::beamsplitter(2, 0, 1, M_PI / 4, 0.0).S, 1e-14));
    // Single photon on mode 0 through the Fock-space beamsplitter.
    FockVector psi = fock_number_state({1, 0}, 4);
    apply_gate(psi, Gate::beamsplitter(0, 1, M_PI / 4, 0.0));
    EXPECT_NEAR(std::abs(psi.at({1, 0})), 1.0 / std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(std::abs(psi.at({0, 1})), 1.0 / std::sqrt(2.0), 1e-12);
    // The same map on a coherent input, Gaussian route against the oracle.
    CVec alpha(2);
    alpha << cplx(0.6, 0.2), cplx(-0.3, 0.4);
    GaussianMixed out = apply_symplectic(GaussianPure::coherent(alpha).mixed(), O);
    FockVector ref = oracle_state(2, {Gate::displace(0, alpha(0)), Gate::displace(1, alpha(1)),
                                      Gate::beamsplitter(0, 1, M_PI / 4, 0.0)},
                                  30);
    cplx a0 = 0.0;
    for (int m = 0; m + 1 < ref.cutoff; m++) {
        for (int k = 0; k < ref.cutoff; k++) {
            a0 += std::conj(ref.at({m, k})) * std::sqrt(m + 1.0) * ref.at({m + 1, k});
        }
    }
    EXPECT_NEAR(out.mean(0), std::sqrt(2.0) * a0.real(), 1e-10);
    EXPECT_NEAR(out.mean(1), std::sqrt(2.0) * a0.imag(), 1e-10);
}

TEST(TensorTrace, Vacua) {
    GaussianMixed v2 = tensor(GaussianMixed::vacuum(1), GaussianMixed::vacuum(1));
    EXPECT_EQ(v2.modes(), 2);
    EXPECT_TRUE(v2.cov.isIdentity(0.0));
    GaussianMixed v1 = partial_trace(GaussianMixed::vacuum(2), {1});
    EXPECT_EQ(v1.modes(), 1);
    EXPECT_TRUE(v1.cov.isIdentity(0.0));
}

TEST(TensorTrace, TwoModeSqueezedReducesToThermal) {
    for (double r : {0.3, 0.8, 1.4}) {
        GaussianMixed red = partial_trace(two_mode_squeezed(r), {1});
        EXPECT_TRUE(red.cov.isApprox(std::cosh(2 * r) * Mat::Identity(2, 2), 1e-12)) << "r = " << r;
    }
}

TEST(Channel, IdentityNoiseAndReplacement) {
    GaussianMixed s = GaussianPure::squeezed_coherent(cplx(0.4, 0.1), 0.3).mixed();
    GaussianMixed same = apply_channel(s, GaussianChannel::identity(1));
    EXPECT_TRUE(same.cov.isApprox(s.cov, 1e-15));
    EXPECT_TRUE(same.mean.isApprox(s.mean, 1e-15));

    double nbar = 0.7;
    GaussianMixed noisy = apply_channel(GaussianMixed::vacuum(1), GaussianChannel::classical_noise(1, nbar));
    EXPECT_TRUE(noisy.cov.isApprox((1 + 2 * nbar) * Mat::Identity(2, 2), 1e-14));
    EXPECT_TRUE(noisy.cov.isApprox(GaussianMixed::thermal(1, nbar).cov, 1e-14));

    GaussianChannel replace{Mat::Zero(2, 2), Mat::Identity(2, 2), Vec::Zero(2)};
    GaussianMixed vac = apply_channel(s, replace);
    EXPECT_TRUE(vac.cov.isIdentity(1e-15));
    EXPECT_TRUE(vac.mean.isZero(1e-15));
}

TEST(Channel, LossShrinksMean) {
    GaussianMixed coh = GaussianPure::coherent(cplx(1.0, 0.5)).mixed();
    GaussianMixed out = apply_channel(coh, GaussianChannel::pure_loss(1, 0.64));
    EXPECT_TRUE(out.mean.isApprox(0.8 * coh.mean, 1e-14));
    EXPECT_TRUE(out.cov.isIdentity(1e-14));
}

TEST(Channel, RejectsNonPhysical) {
    GaussianChannel bad{Mat::Identity(2, 2) * 2.0, Mat::Zero(2, 2), Vec::Zero(2)};
    EXPECT_THROW(bad.validate(), ValidationError);
}

TEST(GeneralDyne, VacuumHeterodyneAtOrigin) {
    double p = generaldyne_density(GaussianMixed::vacuum(1), GeneralDyne::heterodyne({0}), Vec::Zero(2));
    EXPECT_NEAR(p, 1.0 / (2 * M_PI), 1e-15);
}

TEST(GeneralDyne, VacuumDecay) {
    Vec r = vec2(0.9, -1.3);
    double p = generaldyne_density(GaussianMixed::vacuum(1), GeneralDyne::heterodyne({0}), r);
    EXPECT_NEAR(p, std::exp(-r.squaredNorm() / 2) / (2 * M_PI), 1e-15);
}

TEST(GeneralDyne, GridNormalization) {
    GaussianMixed s = GaussianPure::squeezed_coherent(cplx(0.7, -0.4), std::polar(0.5, 0.3)).mixed();
    GeneralDyne het = GeneralDyne::heterodyne({0});
    double h = 0.05;
    double total = 0.0;
    for (double q = -12; q <= 12; q += h) {
        for (double p = -12; p <= 12; p += h) {
            total += generaldyne_density(s, het, vec2(q, p));
        }
    }
    EXPECT_NEAR(total * h * h, 1.0, 1e-6);
}

TEST(GeneralDyne, PeakAtMean) {
    GaussianMixed s = GaussianPure::squeezed_coherent(cplx(0.3, 0.2), 0.6).mixed();
    double peak = generaldyne_density(s, GeneralDyne::heterodyne({0}), s.mean);
    Mat sum = s.cov + Mat::Identity(2, 2);
    EXPECT_NEAR(peak, 1.0 / (M_PI * std::sqrt(sum.determinant())), 1e-14);
}

TEST(Conditioning, ProductStateUnchanged) {
    GaussianMixed a = GaussianPure::squeezed_coherent(cplx(0.2, 0.1), 0.4).mixed();
    GaussianMixed b = GaussianPure::coherent(cplx(-0.5, 0.3)).mixed();
    GaussianMixed out = condition_on_generaldyne(tensor(a, b), GeneralDyne::heterodyne({1}), vec2(1.2, -0.7));
    EXPECT_TRUE(out.cov.isApprox(a.cov, 1e-13));
    EXPECT_TRUE(out.mean.isApprox(a.mean, 1e-13));
}

TEST(Conditioning, OutcomeAtMeanLeavesMean) {
    GaussianMixed s = apply_symplectic(tensor(GaussianPure::coherent(cplx(0.4, 0.0)).mixed(),
                                              GaussianPure::coherent(cplx(0.0, 0.6)).mixed()),
                                       circuit_unitary({Gate::squeeze(0, 0.5), Gate::beamsplitter(0, 1, 0.6, 0.2)}, 2).S);
    Vec mb = s.mean.segment(2, 2);
    GaussianMixed out = condition_on_generaldyne(s, GeneralDyne::heterodyne({1}), mb);
    EXPECT_TRUE(out.mean.isApprox(s.mean.head(2), 1e-13));
}

TEST(Conditioning, TwoModeSqueezedAgainstOracle) {
    double r = 0.5;
    GaussianMixed tms = two_mode_squeezed(r);
    cplx beta(0.4, -0.3);
    Vec y = vec2(std::sqrt(2.0) * beta.real(), std::sqrt(2.0) * beta.imag());
    GaussianMixed out = condition_on_generaldyne(tms, GeneralDyne::heterodyne({1}), y);
    Mat thermal = partial_trace(tms, {0}).cov;
    EXPECT_LT(out.cov.trace(), thermal.trace());
    EXPECT_TRUE(is_pure(out.cov));

    int nc = 40;
    FockVector psi =
        oracle_state(2, {Gate::squeeze(0, r), Gate::squeeze(1, -r), Gate::beamsplitter(0, 1, M_PI / 4, 0.0)}, nc);
    // (<beta| (x) 1)|psi> on mode 0.
    CVec cond = CVec::Zero(nc);
    for (int m = 0; m < nc; m++) {
        double fact = 1.0;
        for (int k = 0; k < nc; k++) {
            if (k > 0) {
                fact *= std::sqrt(static_cast<double>(k));
            }
            cplx bra = std::exp(-std::norm(beta) / 2) * std::pow(std::conj(beta), k) / fact;
            cond(m) += bra * psi.at({m, k});
        }
    }
    cond /= cond.norm();
    cplx a = 0.0;
    double n_a = 0.0;
    for (int m = 0; m + 1 < nc; m++) {
        a += std::conj(cond(m)) * std::sqrt(m + 1.0) * cond(m + 1);
    }
    for (int m = 0; m < nc; m++) {
        n_a += m * std::norm(cond(m));
    }
    EXPECT_NEAR(out.mean(0), std::sqrt(2.0) * a.real(), 1e-10);
    EXPECT_NEAR(out.mean(1), std::sqrt(2.0) * a.imag(), 1e-10);
    EXPECT_NEAR(mean_photon_number(out), n_a, 1e-10);
}

TEST(Fidelity, VacuumAndCoherent) {
    EXPECT_NEAR(fidelity_pure(GaussianMixed::vacuum(2), GaussianPure::vacuum(2)), 1.0, 1e-15);
    cplx a(0.8, -0.6);
    EXPECT_NEAR(fidelity_pure(GaussianMixed::vacuum(1), GaussianPure::coherent(a)), std::exp(-std::norm(a)), 1e-14);
    FockVector psi = oracle_state(1, {Gate::displace(0, a)}, 40);
    EXPECT_NEAR(std::norm(psi.at({0})), std::exp(-std::norm(a)), 1e-12);
}

TEST(Fidelity, OptimalFock1Gaussian) {
    double alpha = std::sqrt(2.0 / 3.0);
    double xi = std::log(std::sqrt(3.0));
    FockVector psi = oracle_state(1, {Gate::squeeze(0, xi), Gate::displace(0, alpha)}, 60);
    EXPECT_NEAR(std::norm(psi.at({1})), 0.47789, 1e-5);
}

TEST(Fidelity, MixedStateBelowOne) {
    GaussianMixed th = GaussianMixed::thermal(1, 0.5);
    double f = fidelity_pure(th, GaussianPure::vacuum(1));
    EXPECT_NEAR(f, 1.0 / 1.5, 1e-14);
}

TEST(Validation, UncertaintyViolation) {
    GaussianMixed bad{Mat::Identity(2, 2) * 0.5, Vec::Zero(2)};
    EXPECT_THROW(bad.validate(), ValidationError);
    EXPECT_THROW(GaussianMixed::thermal(1, -0.1), ValidationError);
}
