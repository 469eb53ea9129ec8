#pragma once

#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include "perspeed/cyclic.hpp"
#include "perspeed/model.hpp"

namespace perspeed {

enum class Scheme { Imex, Explicit };

/// Setup for a truncated-line invasion run. dx must divide the habitat
/// period; x_min/x_max are snapped to the dx lattice.
struct SimulationConfig {
    double x_min = -50.0;
    double x_max = 150.0;
    double dx = 0.05;
    double dt = 0.0;  // 0 => auto (accuracy-capped for IMEX, stability for explicit)
    double t_final = 80.0;
    Scheme scheme = Scheme::Imex;
    double theta = 0.5;             // front level as a fraction of min u1*
    double output_interval = 0.25;  // front-trace sampling
    double front_x0 = 0.0;          // invader block occupies x <= front_x0
    double profile_start_frac = 0.6;
    int profile_snapshots = 12;
};

struct FrontTrace {
    std::vector<double> times;
    std::vector<double> positions;  // rightmost crossing of u1 >= theta*min u1*
    double theta = 0.5;
    double fitted_speed = 0.0;
    std::pair<double, double> fit_window{0.0, 0.0};
    double fit_residual = 0.0;  // RMS deviation from the fitted line
};

/// Pulsating-wave profile on the (xi, phase) lattice the run can observe:
/// one row per filled bin, snapshot-averaged. Diagnostics quantify
/// registration quality, per-phase monotonicity and the edge limits.
struct WaveProfile {
    std::vector<double> xi;
    std::vector<double> phase;  // x mod L
    std::vector<double> u1, u2;
    double speed_used = 0.0;
    double registration_rms = 0.0;
    bool converged = true;
    // largest uphill move of u1 / downhill move of u2 along any phase column,
    // and the one-cell tolerance (max adjacent variation of the merged profile)
    double max_uphill_u1 = 0.0;
    double max_downhill_u2 = 0.0;
    double one_cell_tol_u1 = 0.0;
    double one_cell_tol_u2 = 0.0;
    // worst deviation from (u1*, 0) at the left edge and (0, u2*) at the right
    double edge_dev_left = 0.0;
    double edge_dev_right = 0.0;
    // max deviation of any sample from the phase-merged profile (collapses
    // to interpolation noise in a homogeneous habitat)
    double phase_variation = 0.0;
};

/// Two-species state on the truncated line; owns its scratch and is not
/// shareable mid-run. Independent runs may execute concurrently.
class LineSimulator {
public:
    LineSimulator(const CompetitionModel& model, const SimulationConfig& config);

    void set_state(Eigen::ArrayXd u1, Eigen::ArrayXd u2);
    void set_invasion_initial();  // u1 block on x <= front_x0, u2 = u2* everywhere

    void step();
    void advance_to(double t);

    double t() const { return t_; }
    double dt() const { return dt_; }
    int n_nodes() const { return static_cast<int>(x_.size()); }
    const Eigen::ArrayXd& x() const { return x_; }
    const Eigen::ArrayXd& u1() const { return u1_; }
    const Eigen::ArrayXd& u2() const { return u2_; }
    const GridFunction& u1_star() const { return u1_star_; }
    const GridFunction& u2_star() const { return u2_star_; }
    long clipped_total() const { return clipped_total_; }

    /// Rightmost interpolated crossing of u1 >= level, scanning from the
    /// right boundary; nullopt when u1 stays below the level everywhere.
    std::optional<double> front_position(double level) const;

    int phase_index(int node) const;  // index into the periodic grid of x mod L
    int nodes_per_period() const { return n_per_; }

    void override_dt(double dt);  // profile runs retune dt to the wave period

private:
    void assemble_steppers();

    SimulationConfig cfg_;
    Eigen::ArrayXd x_;
    Eigen::ArrayXd d1_, g1_, b1_, a11_, a12_;
    Eigen::ArrayXd d2_, g2_, b2_, a21_, a22_;
    Tridiagonal A1_, A2_;    // transport-diffusion operators
    Tridiagonal M1_, M2_;    // I - dt A for the IMEX half
    GridFunction u1_star_, u2_star_;
    Eigen::ArrayXd u1_, u2_;
    double t_ = 0.0;
    double dt_ = 0.0;
    int n_per_ = 0;
    int phase0_ = 0;
    long clipped_total_ = 0;
    long step_index_ = 0;
};

/// Distance-to-E1 record of a periodic initial value problem.
struct PeriodicTrajectory {
    std::vector<double> times;
    std::vector<double> dist_to_e1;  // max(|u1 - u1*|, |u2|) over the period
    GridFunction u1_final, u2_final;
};

/// Integrate the competition system on one period with periodic boundary
/// conditions and record the sup distance to E1 = (u1*, 0).
PeriodicTrajectory run_periodic_ivp(const CompetitionModel& model,
                                    const GridFunction& u1_init,
                                    const GridFunction& u2_init, double t_final,
                                    Scheme scheme = Scheme::Imex,
                                    double output_interval = 1.0, double dt = 0.0);

/// Invasion run with front tracking. Throws SimulationQualityError when the
/// front touches the right boundary guard or never forms.
FrontTrace measure_speed(const CompetitionModel& model, const SimulationConfig& config);

/// Same run, one trace per threshold (a single simulation feeds all levels).
std::vector<FrontTrace> measure_speed_multi(const CompetitionModel& model,
                                            const SimulationConfig& config,
                                            const std::vector<double>& thetas);

/// Re-runs the invasion with the time step tuned so snapshots land on exact
/// multiples of L/speed, then bins by (xi, x mod L) and averages.
WaveProfile extract_profile(const CompetitionModel& model,
                            const SimulationConfig& config, double speed);

void write_front_csv(std::ostream& os, const FrontTrace& trace);
void write_profile_csv(std::ostream& os, const WaveProfile& profile);
void write_distance_csv(std::ostream& os, const PeriodicTrajectory& traj);

}  // namespace perspeed
