#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "tlsdyn/diffusion.hpp"

using namespace tlsdyn;
using namespace tlsdyn::diffusion;

namespace {

constexpr double kPi = 3.14159265358979323846;

Fluctuator make_tf(double rate, double g, int state = 1) {
    Fluctuator f;
    f.flip_rate = rate;
    f.g_parallel_mhz = g;
    f.state = state;
    return f;
}

}  // namespace

TEST(FlipRate, Endpoints) {
    EXPECT_DOUBLE_EQ(sample_flip_rate(0.0, 1.0 / 60.0, 4.0), 1.0 / 60.0);
    EXPECT_DOUBLE_EQ(sample_flip_rate(1.0, 1.0 / 60.0, 4.0), 4.0);
    EXPECT_NEAR(sample_flip_rate(0.5, 1.0 / 60.0, 4.0), std::sqrt(4.0 / 60.0), 1e-14);
}

TEST(FlipRate, RejectsInvalidBounds) {
    EXPECT_THROW(sample_flip_rate(0.5, 0.0, 1.0), std::invalid_argument);
    EXPECT_THROW(sample_flip_rate(0.5, 2.0, 1.0), std::invalid_argument);
    EXPECT_THROW(sample_flip_rate(1.5, 0.1, 1.0), std::invalid_argument);
    EXPECT_THROW(sample_flip_rate(-0.1, 0.1, 1.0), std::invalid_argument);
}

TEST(FlipRate, HistogramFollowsInverseGamma) {
    // Density C/Γ puts equal mass in equal-width bins of ln Γ.
    const double lo = 1e-3, hi = 1.0;
    const int bins = 12;
    const int n = 1000000;
    std::vector<int> counts(bins, 0);
    Engine rng = make_engine(123);
    for (int i = 0; i < n; ++i) {
        const double g = sample_flip_rate(uniform01(rng), lo, hi);
        const int b = std::min(bins - 1, static_cast<int>(std::log(g / lo) / std::log(hi / lo) * bins));
        counts[static_cast<std::size_t>(b)]++;
    }
    const double p = 1.0 / bins;
    const double sigma = std::sqrt(n * p * (1 - p));
    for (int c : counts) EXPECT_NEAR(c, n * p, 3.0 * sigma);
}

TEST(DipoleMagnitude, MeanBoundsAndEndpoint) {
    Engine rng = make_engine(5);
    const int n = 1000000;
    const double p_max = 1.5;
    double sum = 0.0;
    int top = 0;
    for (int i = 0; i < n; ++i) {
        const double p = sample_dipole_magnitude(rng, p_max);
        ASSERT_GE(p, 0.0);
        ASSERT_LE(p, p_max);
        sum += p;
        top += p > 0.999 * p_max ? 1 : 0;
    }
    const double mean = sum / n;
    EXPECT_NEAR(mean, p_max * 4.0 / (3.0 * kPi), 0.005 * p_max * 4.0 / (3.0 * kPi));
    // Mass of √(1−x²)/(π/4) above x = 0.999, by the substitution 1 − x² ≈ 2(1 − x).
    const double expected = std::sqrt(2.0) * (2.0 / 3.0) * std::pow(0.001, 1.5) / (kPi / 4.0) * n;
    EXPECT_LE(top, expected + 3.0 * std::sqrt(expected));
}

TEST(UnitVector, IsotropicAndNormalized) {
    Engine rng = make_engine(6);
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    double zz = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const auto v = sample_unit_vector(rng);
        ASSERT_NEAR(v.norm(), 1.0, 1e-12);
        mean += v;
        zz += v.z() * v.z();
    }
    mean /= n;
    EXPECT_LT(mean.norm(), 0.01);
    EXPECT_NEAR(zz / n, 1.0 / 3.0, 0.005);
}

TEST(Populate, PoissonMeanAtDensity1e4) {
    SimConfig cfg;
    cfg.tf_density = 1e4;
    double total = 0.0;
    const int reps = 10000;
    for (int r = 0; r < reps; ++r) {
        Engine rng = make_engine(derive_seed(8, static_cast<std::uint64_t>(r)));
        total += static_cast<double>(populate_fluctuators(cfg, rng).fluctuators.size());
    }
    EXPECT_NEAR(total / reps, 30.0, 0.6);
}

TEST(Populate, SpacingAt5e4) {
    SimConfig cfg;
    cfg.tf_density = 5e4;
    const double mean_n = cfg.tf_density * cfg.volume_um3() * cfg.energy_bandwidth;
    EXPECT_NEAR(mean_n, 150.0, 1e-9);
    const double spacing_nm = std::cbrt(cfg.volume_um3() / mean_n) * 1000.0;
    EXPECT_NEAR(spacing_nm, 27.0, 0.5);
}

TEST(Populate, FieldsRespectInvariants) {
    SimConfig cfg;
    cfg.tf_density = 5e4;
    Engine rng = make_engine(17);
    const auto pop = populate_fluctuators(cfg, rng);
    ASSERT_FALSE(pop.fluctuators.empty());
    EXPECT_LE(pop.tls_dipole.magnitude, cfg.p_max);
    for (const auto& f : pop.fluctuators) {
        for (int a = 0; a < 3; ++a) {
            EXPECT_LE(std::abs(f.position_nm[a]), cfg.cuboid_dims_nm[static_cast<std::size_t>(a)] / 2.0);
        }
        EXPECT_NEAR(f.dipole.orientation.norm(), 1.0, 1e-12);
        EXPECT_LE(f.dipole.magnitude, cfg.p_max);
        EXPECT_GE(f.flip_rate, cfg.resolved_gamma_min());
        EXPECT_LE(f.flip_rate, cfg.resolved_gamma_max());
        EXPECT_TRUE(f.state == 1 || f.state == -1);
        EXPECT_DOUBLE_EQ(f.g_parallel_mhz, shift_coupling_mhz(pop.tls_dipole, f.dipole, f.position_nm, cfg.eps_r,
                                                              cfg.coupling_convention));
    }
}

TEST(Populate, ZeroDensityIsEmpty) {
    SimConfig cfg;
    cfg.tf_density = 0.0;
    Engine rng = make_engine(1);
    EXPECT_TRUE(populate_fluctuators(cfg, rng).fluctuators.empty());
}

TEST(ShiftCoupling, ConventionsDifferBy2Pi) {
    const auto tls = phys::DipoleMoment::along(1.0, Eigen::Vector3d::UnitZ());
    const auto tf = phys::DipoleMoment::along(0.8, Eigen::Vector3d(1.0, 0.2, 0.4));
    const Eigen::Vector3d r(0.5, 30.0, -12.0);
    const double ordinary = shift_coupling_mhz(tls, tf, r, 10.0, CouplingConvention::ordinary);
    EXPECT_DOUBLE_EQ(ordinary, phys::dipole_dipole_gzz(tls, tf, r, 10.0).g_zz_over_h);
    EXPECT_NEAR(shift_coupling_mhz(tls, tf, r, 10.0, CouplingConvention::angular), 2.0 * kPi * ordinary,
                1e-12 * std::abs(ordinary));
}

TEST(Step, NoFluctuatorsLeavesOffset) {
    Engine rng = make_engine(1);
    std::vector<Fluctuator> none;
    EXPECT_EQ(step(none, 3.5, 0.25, rng), 3.5);
}

TEST(Step, ForcedFlipAndReversibility) {
    Engine rng = make_engine(2);
    std::vector<Fluctuator> one = {make_tf(4.0, 7.5, 1)};
    const double after = step(one, 0.0, 0.25, rng);
    EXPECT_DOUBLE_EQ(std::abs(after), 15.0);
    EXPECT_EQ(one[0].state, -1);
    EXPECT_DOUBLE_EQ(step(one, after, 0.25, rng), 0.0);
}

TEST(Step, RejectsProbabilityAboveOne) {
    Engine rng = make_engine(3);
    std::vector<Fluctuator> one = {make_tf(5.0, 1.0)};
    EXPECT_THROW(step(one, 0.0, 0.25, rng), std::invalid_argument);
}

TEST(Step, FlipCountIsBinomial) {
    const double p = 0.1;
    const std::size_t steps = 120;
    const int reps = 10000;
    double total = 0.0;
    Engine rng = make_engine(44);
    for (int r = 0; r < reps; ++r) {
        std::vector<Fluctuator> one = {make_tf(p / 0.25, 1.0)};
        double offset = 0.0;
        int flips = 0;
        for (std::size_t k = 0; k < steps; ++k) {
            const double next = step(one, offset, 0.25, rng);
            flips += next != offset ? 1 : 0;
            offset = next;
        }
        total += flips;
    }
    const double mean = total / reps;
    const double sd_of_mean = std::sqrt(steps * p * (1 - p) / reps);
    EXPECT_NEAR(mean, steps * p, 3.0 * sd_of_mean);
}

TEST(Trajectory, ShapeAndDeterminism) {
    SimConfig cfg;
    const auto a = run_trajectory(cfg, 99);
    const auto b = run_trajectory(cfg, 99);
    ASSERT_EQ(a.size(), 121u);
    EXPECT_EQ(a.delta_mhz.front(), 0.0);
    EXPECT_EQ(a.delta_mhz, b.delta_mhz);
    EXPECT_DOUBLE_EQ(a.times_hr.back(), 30.0);
}

TEST(Trajectory, FrozenRatesGiveZero) {
    SimConfig cfg;
    Engine rng = make_engine(5);
    auto pop = populate_fluctuators(cfg, rng);
    for (auto& f : pop.fluctuators) f.flip_rate = 0.0;
    const auto t = evolve(pop.fluctuators, cfg.steps(), cfg.dt, rng);
    for (double v : t.delta_mhz) EXPECT_EQ(v, 0.0);
}

TEST(Trajectory, SingleFluctuatorIsTwoValued) {
    Engine rng = make_engine(6);
    std::vector<Fluctuator> one = {make_tf(1.0, 12.0, 1)};
    const auto t = evolve(one, 120, 0.25, rng);
    int visits = 0;
    for (double v : t.delta_mhz) {
        EXPECT_TRUE(v == 0.0 || v == -24.0);
        visits += v != 0.0 ? 1 : 0;
    }
    EXPECT_GT(visits, 0);
}

TEST(Trajectory, ValuesLieOnCouplingLattice) {
    SimConfig cfg;
    cfg.tf_density = 2e4;
    Engine rng = make_engine(12);
    auto pop = populate_fluctuators(cfg, rng);
    std::vector<int> initial;
    for (const auto& f : pop.fluctuators) initial.push_back(f.state);
    double offset = 0.0;
    for (std::size_t k = 0; k < cfg.steps(); ++k) {
        offset = step(pop.fluctuators, offset, cfg.dt, rng);
        double lattice = 0.0;
        for (std::size_t i = 0; i < pop.fluctuators.size(); ++i) {
            const int c = (pop.fluctuators[i].state - initial[i]) / 2;
            ASSERT_TRUE(c >= -1 && c <= 1);
            lattice += c * 2.0 * pop.fluctuators[i].g_parallel_mhz;
        }
        EXPECT_NEAR(offset, lattice, 1e-9 * (1.0 + std::abs(lattice)));
    }
}

TEST(Trajectory, ScalesWithCouplings) {
    SimConfig cfg;
    Engine rng = make_engine(13);
    auto pop = populate_fluctuators(cfg, rng);
    auto scaled = pop.fluctuators;
    for (auto& f : scaled) f.g_parallel_mhz *= 2.5;
    Engine r1 = rng, r2 = rng;
    const auto a = evolve(pop.fluctuators, cfg.steps(), cfg.dt, r1);
    const auto b = evolve(scaled, cfg.steps(), cfg.dt, r2);
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(b.delta_mhz[k], 2.5 * a.delta_mhz[k], 1e-9);
}

TEST(Ensemble, DeterministicAndThreadIndependent) {
    SimConfig cfg;
    const auto a = run_ensemble(cfg, 13, 2024, 1);
    const auto b = run_ensemble(cfg, 13, 2024, 4);
    ASSERT_EQ(a.size(), 13u);
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k].delta_mhz, b[k].delta_mhz);
    EXPECT_EQ(run_ensemble(cfg, 1, 2024)[0].delta_mhz, run_trajectory(cfg, derive_seed(2024, 0)).delta_mhz);
    EXPECT_THROW(run_ensemble(cfg, 0, 1), std::invalid_argument);
}

TEST(Evolve, MeanSquareMatchesTelegraphOracle) {
    // A flip with probability p per step leaves a fluctuator displaced with probability
    // (1 - (1 - 2p)^k)/2, so E[dE(k)^2] = sum 2g^2 (1 - (1 - 2p)^k).
    const double dt = 0.25;
    const std::vector<std::pair<double, double>> bath = {{0.05, 1.0}, {0.4, 2.0}, {1.5, 0.5}, {3.0, 3.0}};
    const std::size_t steps = 120;
    const int reps = 20000;
    std::vector<double> mean_sq(steps + 1, 0.0);
    Engine rng = make_engine(77);
    for (int r = 0; r < reps; ++r) {
        std::vector<Fluctuator> tfs;
        for (const auto& [rate, g] : bath) tfs.push_back(make_tf(rate, g, uniform01(rng) < 0.5 ? 1 : -1));
        const auto t = evolve(tfs, steps, dt, rng);
        for (std::size_t k = 0; k <= steps; ++k) mean_sq[k] += t.delta_mhz[k] * t.delta_mhz[k] / reps;
    }
    for (std::size_t k : {1u, 10u, 40u, 120u}) {
        double expected = 0.0;
        for (const auto& [rate, g] : bath) expected += 2.0 * g * g * (1.0 - std::pow(1.0 - 2.0 * rate * dt, k));
        EXPECT_NEAR(mean_sq[k], expected, 0.05 * expected) << "step " << k;
    }
}

TEST(SimConfig, Validation) {
    SimConfig ok;
    EXPECT_NO_THROW(ok.validate());
    EXPECT_EQ(ok.steps(), 120u);
    EXPECT_DOUBLE_EQ(ok.resolved_gamma_min(), 1.0 / 60.0);
    EXPECT_DOUBLE_EQ(ok.resolved_gamma_max(), 4.0);

    SimConfig bad = ok;
    bad.gamma_max = 5.0;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    bad = ok;
    bad.gamma_min = 4.0;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    bad = ok;
    bad.t_sim = 30.1;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    bad = ok;
    bad.tf_density = -1.0;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    bad = ok;
    bad.cuboid_dims_nm[0] = 0.0;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
}
