#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "abx/constants.hpp"
#include "abx/gravity.hpp"
#include "abx/grid.hpp"
#include "abx/rays.hpp"
#include "abx/solver.hpp"
#include "abx/spectra.hpp"
#include "abx/synthesis.hpp"

namespace abx {

// Square n x n grid spanning [lo, hi]^2.
struct GridSpec {
    int n = 0;
    double lo = 0.0;
    double hi = 0.0;

    Grid2D grid() const;
};

// Compact realization of an isolated flux line: a +alpha solenoid core at
// `center`, the compensating -alpha core at `partner`, and the shared
// curl-free tail removed outside `fade_end`, so the potential vanishes
// identically beyond the fade disc and ray-truncated phase integrals close
// through a potential-free region. Both cores are hidden behind masked discs
// of `mask_radius` >= `core_radius`; contours that wind once around `center`
// but not around `partner` pick up exactly alpha.
struct FluxLineSpec {
    double alpha = 0.0;
    Vec2 center;
    Vec2 partner;
    double core_radius = 0.0;
    double fade_start = 0.0;
    double fade_end = 0.0;
    double mask_radius = 0.0;
};

// Two-packet interference run. Geometric-optics packets with carrier k and
// envelope radius delta1 are launched from x0 - launch_distance * theta and
// x0 - launch_distance * omega, evolved for the lattice transit time, and
// compared where they meet. The fringe |u - v|^2, normalized by the measured
// packet amplitudes and averaged over the matched-phase nodes within
// window_radius of x0, estimates 4 sin^2(phase/2) for the phase enclosed by
// the two backward-ray contours. When x0 . (theta - omega) != 0 the carrier
// is snapped to the nearest value that makes the plane-wave phases of the two
// packets agree at x0, so the envelope fringe reads the potential phase alone.
struct MagneticAbConfig {
    GridSpec grid;
    Vec2 x0;
    Vec2 theta{0.0, 1.0};
    Vec2 omega{1.0, 0.0};
    double k = 0.0;
    double delta1 = 0.0;
    double launch_distance = 0.0;
    int steps = 0;
    double window_radius = 0.0;
    std::vector<FluxLineSpec> lines;
    Constants cst;
};

struct MagneticAbReport {
    double enclosed_phase = 0.0;      // backward-ray contour integral of A
    double target = 0.0;              // 4 sin^2(enclosed_phase / 2)
    double fringe = 0.0;              // normalized window-averaged contrast
    double fringe_raw = 0.0;          // |u - v|^2 at x0, unnormalized
    double deviation = 0.0;           // fringe - target
    double relative_deviation = 0.0;  // |deviation| / |target|, 0 when target = 0
    double amplitude_u = 0.0;         // |u(x0)| after transit
    double amplitude_v = 0.0;
    double k_effective = 0.0;         // carrier after phase matching
    double matching_residual = 0.0;   // wrapped plane-phase mismatch at x0
    double group_speed = 0.0;         // lattice group speed sin(k h)/h scale
    double duration = 0.0;
    int window_nodes = 0;
    Vec2 x0_snapped;
    WaveState u;
    WaveState v;
};

MagneticAbReport run_magnetic_ab(const MagneticAbConfig& cfg);

// Annulus wall r_inner <= |x - center| <= r_outer with a gate sector around
// `gate_angle` that closes linearly over [0, eps], stays shut on
// [eps, T - eps], and reopens linearly over [T - eps, T].
struct GateSpec {
    Vec2 center;
    double r_inner = 0.0;
    double r_outer = 0.0;
    double gate_angle = 0.0;
    double open_halfwidth = 0.0;
    double eps = 0.0;
    double T = 0.0;
};

// Two evolutions of one initial state under the same gated wall, differing
// only in the spatially constant potential applied to the sealed inner
// region: a trapezoid pulse of time integral alpha / electric_coupling for
// the primary run and alpha_reference likewise for the reference run. Both
// pulses vanish within guard_steps of the gate motion and ramp over
// ramp_steps, with every breakpoint on the step grid so the midpoint-sampled
// time integral is exact. The initial state is an inner Gaussian (or, when a
// flux line is threaded through a masked disc at the gate center, an inner
// ring) plus an outer ring, clipped to the t = 0 mask and normalized; after
// the gate reopens the components remix for mix_time and the runs are
// compared in sup density norm.
struct ElectricAbConfig {
    GridSpec grid;
    GateSpec gate;
    double dt = 0.0;
    double mix_time = 0.0;
    double alpha = 0.0;
    double alpha_reference = 0.0;
    int ramp_steps = 0;
    int guard_steps = 0;
    Vec2 inner_center;
    double inner_sigma = 0.0;      // Gaussian width, or radial width of the inner ring
    double inner_ring_radius = 0.0;  // 0 selects the plain Gaussian
    double ring_radius = 0.0;
    double ring_sigma = 0.0;
    double inner_weight = 0.5;     // squared-norm share of the inner component
    double threaded_flux = 0.0;    // solenoid flux through the gate center
    double thread_core_radius = 0.0;
    double thread_mask_radius = 0.0;
    Constants cst;
};

struct ElectricAbReport {
    double alpha_target = 0.0;        // wrapped difference of the two pulse integrals
    double phase_measured = 0.0;      // sealed-region phase of primary vs reference
    double phase_error = 0.0;         // wrapped measured - target
    double density_sup_diff = 0.0;    // after reopening and mixing
    double overlap_modulus = 0.0;     // sealed-evolution rigidity, 1 = pure phase
    double inner_mass = 0.0;          // squared norm of the sealed component
    double absorbed_primary = 0.0;    // squared norm swallowed by the gate
    double absorbed_reference = 0.0;
    bool effect_expected = false;     // alpha_target != 0
    bool effect_detected = false;     // density_sup_diff > 1e-3
    WaveState final_primary;
    WaveState final_reference;
};

ElectricAbReport run_electric_ab(const ElectricAbConfig& cfg);

// Discrimination of two static configurations (A, V) and (A'', V'') sharing
// the gated-annulus geometry with flux alpha1 (resp. alpha1_pp) threaded
// through the masked gate center. Criterion a: the loop fluxes over the
// spatial basis circle gamma differ and the two signs both fail to agree mod
// 2 pi. Criterion b: the loop fluxes agree mod 2 pi but the electromagnetic
// fluxes over the through-gate spacetime loop delta differ mod 2 pi. The
// dynamical confirmation runs the two-packet fringe protocol per
// configuration (magnetic channel) and the gated comparison with V vs V''
// (electric channel).
struct CombinedAbConfig {
    double alpha1 = 0.0;
    double alpha1_pp = 0.0;
    double alpha2 = 0.0;
    double alpha2_pp = 0.0;
    MagneticAbConfig fringe;   // lines[0].alpha is replaced per run
    ElectricAbConfig gate;     // alpha / alpha_reference are replaced
    double gamma_radius = 0.0;
    double delta_x_inner = 0.0;   // sealed-side anchor on the gate axis
    double delta_x_outer = 0.0;   // outer anchor on the gate axis
    double flux_tol = 1e-6;
    bool dynamics = true;
    std::string expected;  // "a", "b", "none", or empty when unassessed
};

struct CombinedAbReport {
    double alpha1 = 0.0;          // measured over gamma
    double alpha1_pp = 0.0;
    double alpha2 = 0.0;          // measured over delta
    double alpha2_pp = 0.0;
    double diff_magnetic = 0.0;       // wrapped alpha1 - alpha1_pp
    double sum_magnetic = 0.0;        // wrapped alpha1 + alpha1_pp
    double diff_electromagnetic = 0.0;  // wrapped alpha2 - alpha2_pp
    bool criterion_a = false;
    bool criterion_b = false;
    std::string verdict;          // "a", "b", or "none"
    bool matches_expected = true;
    double fringe = 0.0;
    double fringe_pp = 0.0;
    double fringe_diff = 0.0;
    double density_sup_diff = 0.0;
    bool magnetic_fired = false;  // fringe_diff > 0.05
    bool electric_fired = false;  // density_sup_diff > 1e-3
    bool dynamics_run = false;
};

CombinedAbReport run_combined_ab(const CombinedAbConfig& cfg);

// Analytic-mode scene: reflecting discs that double as solenoid flux
// carriers. `radius` is the billiard boundary, `core_radius` the flux core
// well inside it.
struct RecoveryObstacleSpec {
    double alpha = 0.0;
    Vec2 center;
    double radius = 0.0;
    double core_radius = 0.0;
};

struct RecoveryRaySpec {
    Vec2 start;
    Vec2 direction;
};

// Density-mode measurement: one two-packet interference run whose
// backward-ray contour winds around a subset of the scene flux lines.
struct DensityContourSpec {
    Vec2 x0;
    Vec2 theta;
    Vec2 omega;
};

// Interferometric flux recovery. Analytic mode traces each configured ray
// through the disc scene, closes it with the straight return chord, and
// records the loop phase; density mode runs one interference experiment per
// contour and records only the fringe contrast. recover_fluxes then returns
// the +-alpha candidate pair consistent with every reading.
struct FluxRecoveryConfig {
    std::string mode;  // "analytic" | "density"
    Constants cst;
    std::vector<RecoveryObstacleSpec> obstacles;
    std::vector<RecoveryRaySpec> rays;
    Vec2 box_lo;
    Vec2 box_hi;
    GridSpec grid;
    std::vector<FluxLineSpec> lines;
    std::vector<DensityContourSpec> contours;
    double k = 0.0;
    double delta1 = 0.0;
    double launch_distance = 0.0;
    int steps = 0;
    double window_radius = 0.0;
    double tol = 1e-6;
};

struct FluxRecoveryReport {
    std::vector<double> true_fluxes;  // configured values, canonically wrapped
    std::array<std::vector<double>, 2> candidates;
    double residual = 0.0;
    double recovery_error = 0.0;      // best candidate, worst wrapped component
    double recovery_error_rel = 0.0;  // worst component relative to |true|
    bool sign_pair = false;           // candidates are exact negatives mod 2 pi
    std::vector<std::vector<int>> windings;
    std::vector<double> readings;     // loop phase or fringe contrast per contour
};

FluxRecoveryReport run_flux_recovery(const FluxRecoveryConfig& cfg);

// Torus spectra over a list of holonomy pairs; one eigenvalue row per pair.
struct SpectrumSweepConfig {
    std::vector<std::array<double, 2>> alphas;
    int cutoff = 8;
    int count = 10;
    Vec2 e1{1.0, 0.0};
    Vec2 e2{0.0, 1.0};
    std::vector<FourierCoefficient> potential;
};

struct SpectrumSweepReport {
    std::vector<std::vector<double>> eigenvalues;
};

SpectrumSweepReport run_spectrum_sweep(const SpectrumSweepConfig& cfg);

// Flux-line scattering amplitude on a uniform angular grid, with the
// modulus identity |a|^2 4 pi^2 sin^2(theta/2) = sin^2(alpha/2) re-checked
// at every sample.
struct AmplitudeSweepConfig {
    double alpha = 0.0;
    int n_theta = 0;
    double theta_min = 0.0;
    double theta_max = 0.0;
};

struct AmplitudeSweepReport {
    std::vector<double> theta;
    std::vector<std::complex<double>> value;
    std::vector<double> density;
    double worst_identity_residual = 0.0;
};

AmplitudeSweepReport run_amplitude_sweep(const AmplitudeSweepConfig& cfg);

// Compactly supported C-infinity bump b(r) = amplitude * exp(-sharpness /
// (1 - (r/radius)^2)) centered at `center`.
struct SynthBumpSpec {
    double amplitude = 0.0;
    Vec2 center;
    double radius = 0.0;
    double sharpness = 1.0;
};

// Samples the bump sum, splits it into analytic tail plus compact core, and
// measures reconstruction quality: interior curl error against the
// tail-subtracted field, core leakage outside 1.5 x the support radius, and
// the circulation of tail plus core against the total discrete flux.
struct SynthConfig {
    GridSpec grid;
    std::vector<SynthBumpSpec> bumps;
    Vec2 support_center;
    double support_radius = 0.0;
    double mollifier_radius = 0.0;
    int t_nodes = 16;
    double loop_radius = 0.0;
};

struct SynthReport {
    double total_flux = 0.0;
    double tail_flux = 0.0;           // alpha0 of the split
    double curl_error_rel = 0.0;
    double leakage_rel = 0.0;
    double loop_flux = 0.0;           // tail + core circulation at loop_radius
    double loop_flux_deviation = 0.0;
    ScalarGridField field;
    VectorGridField core;
};

SynthReport run_synth(const SynthConfig& cfg);

// Static-obstruction audit of a stationary metric: basis-loop gravitational
// fluxes, the local/global staticity verdict, and, when a shift gradient is
// supplied, the worst flux change under the corresponding time-shift
// isometry (an exact invariance of the reduced flux).
struct GravityCheckConfig {
    StationaryMetric metric;
    std::vector<Path> loops;
    std::vector<Vec2> probes;
    double tol = 1e-6;
    std::function<Vec2(const Vec2&)> shift_grad;  // optional
};

struct GravityCheckReport {
    bool locally_static = false;
    bool globally_static = false;
    std::vector<double> fluxes;
    double shift_invariance_dev = 0.0;
    bool shift_checked = false;
};

GravityCheckReport run_gravity_check(const GravityCheckConfig& cfg);

// ---- configuration files and the run pipeline -------------------------------

using ScenarioDetail =
    std::variant<MagneticAbConfig, ElectricAbConfig, CombinedAbConfig, FluxRecoveryConfig,
                 SpectrumSweepConfig, AmplitudeSweepConfig, SynthConfig, GravityCheckConfig>;

struct ScenarioConfig {
    std::string kind;
    std::uint64_t seed = 0;
    std::string out_dir;
    ScenarioDetail detail;
};

// Parses and validates a scenario description. The document must carry
// version "abx-scenario/1", a known kind, and exactly the keys the kind
// defines; violations, including JSON syntax errors (reported with their
// parse location), throw config_error.
ScenarioConfig parse_scenario(const std::string& json_text);
ScenarioConfig load_scenario_file(const std::string& path);

// Runs the scenario and writes report.json (stable key order), report.txt,
// and the kind's data files into out_dir (created if needed; out_dir argument
// overrides the config). Returns the text report. Identical configs produce
// byte-identical files: reports carry no timestamps and all reductions are
// deterministically ordered.
std::string run_scenario(const ScenarioConfig& cfg, const std::string& out_dir_override = "");

} // namespace abx
