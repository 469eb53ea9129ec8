#include "perspeed/sim.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "perspeed/errors.hpp"
#include "perspeed/spectral.hpp"

namespace perspeed {

namespace {

constexpr double kUndershootTol = 1e-10;

// Clip negatives to zero; returns the number of nodes below the undershoot
// tolerance (the ones that count toward the quality guard).
long clip_negatives(Eigen::ArrayXd& u, long* clipped_any) {
    long bad = 0;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        if (u[i] < 0.0) {
            if (u[i] < -kUndershootTol) ++bad;
            u[i] = 0.0;
            ++(*clipped_any);
        }
    }
    return bad;
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double rms = 0.0;
};

LinearFit least_squares(const std::vector<double>& t, const std::vector<double>& y) {
    const std::size_t n = t.size();
    double tm = 0, ym = 0;
    for (std::size_t i = 0; i < n; ++i) {
        tm += t[i];
        ym += y[i];
    }
    tm /= n;
    ym /= n;
    double stt = 0, sty = 0;
    for (std::size_t i = 0; i < n; ++i) {
        stt += (t[i] - tm) * (t[i] - tm);
        sty += (t[i] - tm) * (y[i] - ym);
    }
    LinearFit fit;
    fit.slope = sty / stt;
    fit.intercept = ym - fit.slope * tm;
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - fit.slope * t[i] - fit.intercept;
        ss += r * r;
    }
    fit.rms = std::sqrt(ss / n);
    return fit;
}

}  // namespace

LineSimulator::LineSimulator(const CompetitionModel& model, const SimulationConfig& config)
    : cfg_(config) {
    if (!(cfg_.dx > 0.0)) throw ConfigError("sim.dx", "spacing must be positive");
    if (!(cfg_.x_min < 0.0 && cfg_.x_max > 0.0))
        throw ConfigError("sim.domain", "need x_min < 0 < x_max");

    const double L = model.L;
    const double per = L / cfg_.dx;
    n_per_ = static_cast<int>(std::llround(per));
    if (std::abs(per - n_per_) > 1e-9 * std::max(1.0, per) || n_per_ < 8)
        throw ConfigError("sim.dx", "dx must divide the habitat period (>= 8 cells per period)");

    const long i0 = std::llround(cfg_.x_min / cfg_.dx);
    const long i1 = std::llround(cfg_.x_max / cfg_.dx);
    const int n = static_cast<int>(i1 - i0 + 1);
    if (n < 3 * n_per_) throw ConfigError("sim.domain", "domain shorter than 3 periods");
    phase0_ = static_cast<int>(((i0 % n_per_) + n_per_) % n_per_);

    x_.resize(n);
    for (int i = 0; i < n; ++i) x_[i] = static_cast<double>(i0 + i) * cfg_.dx;

    // Sample coefficients on the matching periodic grid and tile by phase
    // index; this keeps the line arrays exactly L-periodic and consistent
    // with the periodic steady states used for initial and reference data.
    const SampledModel sm = sample_model(
        [&] { CompetitionModel m = model; m.n = n_per_; return m; }());
    const SteadyStates ss = steady_states(sm);
    u1_star_ = ss.u1_star;
    u2_star_ = ss.u2_star;

    const auto tile = [&](const GridFunction& f) {
        Eigen::ArrayXd v(n);
        for (int i = 0; i < n; ++i) v[i] = f.values[phase_index(i)];
        return v;
    };
    d1_ = tile(sm.d1); g1_ = tile(sm.g1); b1_ = tile(sm.b1);
    d2_ = tile(sm.d2); g2_ = tile(sm.g2); b2_ = tile(sm.b2);
    a11_ = tile(sm.a11); a12_ = tile(sm.a12);
    a21_ = tile(sm.a21); a22_ = tile(sm.a22);

    set_invasion_initial();

    // auto time step: accuracy cap for IMEX, diffusive stability for explicit
    if (cfg_.dt > 0.0) {
        dt_ = cfg_.dt;
    } else {
        const double maxg = std::max(g1_.abs().maxCoeff(), g2_.abs().maxCoeff());
        const double cap1 = (b1_.max(0.0) / a11_).maxCoeff() + 1.0;
        const double cap2 = (b2_.max(0.0) / a22_).maxCoeff() + 1.0;
        const double jac1 = (b1_.abs() + 2.0 * a11_ * cap1 + a12_ * cap2).maxCoeff();
        const double jac2 = (b2_.abs() + a21_ * cap1 + 2.0 * a22_ * cap2).maxCoeff();
        dt_ = std::min(cfg_.dx / (2.0 * maxg + 1.0), 0.25 / std::max(jac1, jac2));
        if (cfg_.scheme == Scheme::Explicit) {
            const double maxd = std::max(d1_.maxCoeff(), d2_.maxCoeff());
            dt_ = std::min(dt_, 0.9 * cfg_.dx * cfg_.dx / (2.0 * maxd));
        }
    }
    assemble_steppers();
}

int LineSimulator::phase_index(int node) const {
    return (phase0_ + node) % n_per_;
}

void LineSimulator::assemble_steppers() {
    const int n = n_nodes();
    const double h = cfg_.dx;
    const auto build = [&](const Eigen::ArrayXd& d, const Eigen::ArrayXd& g) {
        Tridiagonal A;
        A.lower = d / (h * h) + g / (2.0 * h);
        A.upper = d / (h * h) - g / (2.0 * h);
        A.pot = Eigen::ArrayXd::Zero(n);
        if (A.lower.minCoeff() < 0.0 || A.upper.minCoeff() < 0.0)
            throw ConfigError("sim.dx", "dx too coarse for the advection strength");
        // reflecting ends: fold the ghost-node coefficients
        A.upper[0] += A.lower[0];
        A.lower[0] = 0.0;
        A.lower[n - 1] += A.upper[n - 1];
        A.upper[n - 1] = 0.0;
        return A;
    };
    A1_ = build(d1_, g1_);
    A2_ = build(d2_, g2_);
    const auto implicit_of = [&](const Tridiagonal& A) {
        return Tridiagonal{-dt_ * A.lower, -dt_ * A.upper, 1.0 - dt_ * A.pot};
    };
    M1_ = implicit_of(A1_);
    M2_ = implicit_of(A2_);
}

void LineSimulator::override_dt(double dt) {
    dt_ = dt;
    assemble_steppers();
}

void LineSimulator::set_state(Eigen::ArrayXd u1, Eigen::ArrayXd u2) {
    if (u1.size() != x_.size() || u2.size() != x_.size())
        throw ConfigError("sim.initial", "state length must match the node count");
    u1_ = std::move(u1);
    u2_ = std::move(u2);
    t_ = 0.0;
    step_index_ = 0;
    clipped_total_ = 0;
}

void LineSimulator::set_invasion_initial() {
    const int n = n_nodes();
    const double block = u1_star_.values.minCoeff();
    Eigen::ArrayXd u1(n), u2(n);
    for (int i = 0; i < n; ++i) {
        u1[i] = (x_[i] <= cfg_.front_x0) ? block : 0.0;
        u2[i] = u2_star_.values[phase_index(i)];
    }
    set_state(std::move(u1), std::move(u2));
}

void LineSimulator::step() {
    const Eigen::ArrayXd r1 = u1_ * (b1_ - a11_ * u1_ - a12_ * u2_);
    const Eigen::ArrayXd r2 = u2_ * (b2_ - a21_ * u1_ - a22_ * u2_);
    if (cfg_.scheme == Scheme::Imex) {
        u1_ = M1_.solve((u1_ + dt_ * r1).eval());
        u2_ = M2_.solve((u2_ + dt_ * r2).eval());
    } else {
        u1_ += dt_ * (A1_.apply(u1_) + r1);
        u2_ += dt_ * (A2_.apply(u2_) + r2);
    }
    if (!u1_.allFinite() || !u2_.allFinite()) {
        std::ostringstream msg;
        msg << "non-finite state at step " << step_index_ << " (t=" << t_ << ")";
        throw SimulationQualityError(msg.str());
    }
    const long bad =
        clip_negatives(u1_, &clipped_total_) + clip_negatives(u2_, &clipped_total_);
    if (bad > n_nodes() / 1000) {
        std::ostringstream msg;
        msg << "undershoot clipping exceeded 0.1% of nodes at step " << step_index_;
        throw SimulationQualityError(msg.str());
    }
    t_ += dt_;
    ++step_index_;
}

void LineSimulator::advance_to(double t) {
    while (t_ + 0.5 * dt_ < t) step();
}

std::optional<double> LineSimulator::front_position(double level) const {
    const int n = n_nodes();
    for (int i = n - 1; i >= 0; --i) {
        if (u1_[i] >= level) {
            if (i == n - 1) return x_[i];
            const double drop = u1_[i] - u1_[i + 1];
            if (drop <= 0.0) return x_[i];
            return x_[i] + cfg_.dx * std::min(1.0, (u1_[i] - level) / drop);
        }
    }
    return std::nullopt;
}

std::vector<FrontTrace> measure_speed_multi(const CompetitionModel& model,
                                            const SimulationConfig& config,
                                            const std::vector<double>& thetas) {
    LineSimulator sim(model, config);
    const double u1_min = sim.u1_star().values.minCoeff();

    std::vector<double> levels;
    for (double th : thetas) levels.push_back(th * u1_min);

    std::vector<double> times{0.0};
    std::vector<std::vector<double>> positions(thetas.size());
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t j = 0; j < thetas.size(); ++j) {
        auto p = sim.front_position(levels[j]);
        positions[j].push_back(p ? *p : nan);
    }

    const long rec_every = std::max<long>(1, std::llround(config.output_interval / sim.dt()));
    long k = 0;
    while (sim.t() + 0.5 * sim.dt() < config.t_final) {
        sim.step();
        if (++k % rec_every == 0) {
            times.push_back(sim.t());
            for (std::size_t j = 0; j < thetas.size(); ++j) {
                auto p = sim.front_position(levels[j]);
                positions[j].push_back(p ? *p : nan);
            }
        }
    }

    const double guard = config.x_max - 5.0 * config.dx;
    std::vector<FrontTrace> traces;
    for (std::size_t j = 0; j < thetas.size(); ++j) {
        FrontTrace tr;
        tr.theta = thetas[j];
        tr.times = times;
        tr.positions = positions[j];

        const std::size_t half = times.size() / 2;
        std::vector<double> tf, pf;
        for (std::size_t i = half; i < times.size(); ++i) {
            if (std::isnan(positions[j][i]))
                throw SimulationQualityError("no invasion front: level crossing lost in the fit window");
            tf.push_back(times[i]);
            pf.push_back(positions[j][i]);
            if (positions[j][i] > guard)
                throw SimulationQualityError("boundary-contaminated: front reached the right guard band");
        }
        if (tf.size() < 2) throw SimulationQualityError("fit window too short");
        const LinearFit fit = least_squares(tf, pf);
        tr.fitted_speed = fit.slope;
        tr.fit_window = {tf.front(), tf.back()};
        tr.fit_residual = fit.rms;
        traces.push_back(std::move(tr));
    }
    return traces;
}

FrontTrace measure_speed(const CompetitionModel& model, const SimulationConfig& config) {
    return measure_speed_multi(model, config, {config.theta}).front();
}

PeriodicTrajectory run_periodic_ivp(const CompetitionModel& model,
                                    const GridFunction& u1_init,
                                    const GridFunction& u2_init, double t_final,
                                    Scheme scheme, double output_interval, double dt) {
    const SampledModel sm = sample_model(model);
    const PeriodicGrid grid = sm.grid;
    if (!(u1_init.grid == grid) || !(u2_init.grid == grid))
        throw ConfigError("ivp.initial", "initial data must live on the model grid");
    if (u1_init.values.minCoeff() < 0.0 || u2_init.values.minCoeff() < 0.0)
        throw ConfigError("ivp.initial", "initial data must be nonnegative");

    const SteadyStates ss = steady_states(sm);
    const GridFunction zero(grid, Eigen::ArrayXd::Zero(grid.n_points));
    const CyclicTridiagonal A1 = discretize(EigenProblem(sm.d1, sm.g1, zero, 0.0));
    const CyclicTridiagonal A2 = discretize(EigenProblem(sm.d2, sm.g2, zero, 0.0));

    const double h = grid.spacing();
    if (dt <= 0.0) {
        const double maxg =
            std::max(sm.g1.values.abs().maxCoeff(), sm.g2.values.abs().maxCoeff());
        const double cap1 =
            std::max((sm.b1.values.max(0.0) / sm.a11.values).maxCoeff(),
                     u1_init.values.maxCoeff()) + 1.0;
        const double cap2 =
            std::max((sm.b2.values.max(0.0) / sm.a22.values).maxCoeff(),
                     u2_init.values.maxCoeff()) + 1.0;
        const double jac1 =
            (sm.b1.values.abs() + 2.0 * sm.a11.values * cap1 + sm.a12.values * cap2)
                .maxCoeff();
        const double jac2 =
            (sm.b2.values.abs() + sm.a21.values * cap1 + 2.0 * sm.a22.values * cap2)
                .maxCoeff();
        dt = std::min(h / (2.0 * maxg + 1.0), 0.25 / std::max(jac1, jac2));
        if (scheme == Scheme::Explicit) {
            const double maxd = std::max(sm.d1.values.maxCoeff(), sm.d2.values.maxCoeff());
            dt = std::min(dt, 0.9 * h * h / (2.0 * maxd));
        }
    }

    CyclicTridiagonal M1{-dt * A1.lower, -dt * A1.upper, 1.0 - dt * A1.pot};
    CyclicTridiagonal M2{-dt * A2.lower, -dt * A2.upper, 1.0 - dt * A2.pot};

    Eigen::ArrayXd u1 = u1_init.values, u2 = u2_init.values;
    const auto dist = [&]() {
        return std::max((u1 - ss.u1_star.values).abs().maxCoeff(), u2.abs().maxCoeff());
    };

    PeriodicTrajectory traj;
    traj.times.push_back(0.0);
    traj.dist_to_e1.push_back(dist());
    const long rec_every = std::max<long>(1, std::llround(output_interval / dt));
    long clipped = 0;
    long k = 0;
    double t = 0.0;
    while (t + 0.5 * dt < t_final) {
        const Eigen::ArrayXd r1 = u1 * (sm.b1.values - sm.a11.values * u1 - sm.a12.values * u2);
        const Eigen::ArrayXd r2 = u2 * (sm.b2.values - sm.a21.values * u1 - sm.a22.values * u2);
        if (scheme == Scheme::Imex) {
            u1 = M1.solve((u1 + dt * r1).eval());
            u2 = M2.solve((u2 + dt * r2).eval());
        } else {
            u1 += dt * (A1.apply(u1) + r1);
            u2 += dt * (A2.apply(u2) + r2);
        }
        if (!u1.allFinite() || !u2.allFinite()) {
            std::ostringstream msg;
            msg << "non-finite state at step " << k;
            throw SimulationQualityError(msg.str());
        }
        const long bad = clip_negatives(u1, &clipped) + clip_negatives(u2, &clipped);
        if (bad > grid.n_points / 1000)
            throw SimulationQualityError("undershoot clipping exceeded 0.1% of nodes");
        t += dt;
        if (++k % rec_every == 0) {
            traj.times.push_back(t);
            traj.dist_to_e1.push_back(dist());
        }
    }
    traj.u1_final = GridFunction(grid, std::move(u1));
    traj.u2_final = GridFunction(grid, std::move(u2));
    return traj;
}

WaveProfile extract_profile(const CompetitionModel& model,
                            const SimulationConfig& config, double speed) {
    if (!(speed > 0.0)) throw ConfigError("profile.speed", "need a positive wave speed");
    LineSimulator sim(model, config);

    // retune dt so consecutive snapshots are exactly L/speed apart
    const double L = model.L;
    const double wave_period = L / speed;
    const long m = std::max<long>(1, static_cast<long>(std::ceil(wave_period / sim.dt())));
    const double dt = wave_period / static_cast<double>(m);
    sim.override_dt(dt);

    const double t_start_req = config.profile_start_frac * config.t_final;
    const long n0 = static_cast<long>(std::ceil(t_start_req / dt));
    int n_snap = config.profile_snapshots;
    while (n_snap > 2 &&
           (n0 + static_cast<long>(n_snap - 1) * m) * dt > config.t_final)
        --n_snap;
    if (n_snap < 2)
        throw SimulationQualityError("profile window too short for two snapshots");

    const int n = sim.n_nodes();
    const int n_per = sim.nodes_per_period();
    std::vector<Eigen::ArrayXd> snap1, snap2;
    std::vector<double> snap_t;
    for (int k = 0; k < n_snap; ++k) {
        const double target = (n0 + static_cast<long>(k) * m) * dt;
        sim.advance_to(target + 0.25 * dt);
        snap1.push_back(sim.u1());
        snap2.push_back(sim.u2());
        snap_t.push_back(sim.t());
    }

    // Per-phase comb anchored at snapshot 0; later snapshots shift by whole
    // periods, so each (phase, key) bin averages one value per snapshot.
    std::vector<double> anchor(n_per, std::numeric_limits<double>::infinity());
    for (int i = 0; i < n; ++i) {
        const double xi = sim.x()[i] - speed * snap_t[0];
        anchor[sim.phase_index(i)] = std::min(anchor[sim.phase_index(i)], xi);
    }

    struct Bin {
        double xi_sum = 0, u1_sum = 0, u2_sum = 0, u1_sq = 0, u2_sq = 0;
        int count = 0;
    };
    std::map<std::pair<int, long>, Bin> bins;
    double worst_misreg = 0.0;
    for (int k = 0; k < n_snap; ++k) {
        for (int i = 0; i < n; ++i) {
            const int p = sim.phase_index(i);
            const double xi = sim.x()[i] - speed * snap_t[k];
            const double rel = (xi - anchor[p]) / L;
            const long key = std::llround(rel);
            worst_misreg = std::max(worst_misreg, std::abs(rel - key));
            if (std::abs(rel - key) > 0.25) continue;  // severe drift: drop sample
            Bin& b = bins[{p, key}];
            b.xi_sum += xi;
            b.u1_sum += snap1[k][i];
            b.u2_sum += snap2[k][i];
            b.u1_sq += snap1[k][i] * snap1[k][i];
            b.u2_sq += snap2[k][i] * snap2[k][i];
            b.count += 1;
        }
    }

    WaveProfile prof;
    prof.speed_used = speed;

    double var_sum = 0.0;
    long var_n = 0;
    struct Row {
        double xi, phase, u1, u2;
        int p;
        long key;
    };
    std::vector<Row> rows;
    for (const auto& [pk, b] : bins) {
        Row r;
        r.p = pk.first;
        r.key = pk.second;
        r.xi = b.xi_sum / b.count;
        r.phase = pk.first * config.dx;
        r.u1 = b.u1_sum / b.count;
        r.u2 = b.u2_sum / b.count;
        rows.push_back(r);
        if (b.count >= 2) {
            var_sum += (b.u1_sq - b.count * r.u1 * r.u1) +
                       (b.u2_sq - b.count * r.u2 * r.u2);
            var_n += 2 * (b.count - 1);
        }
    }
    prof.registration_rms =
        var_n > 0 ? std::sqrt(std::max(0.0, var_sum) / var_n) : 0.0;

    std::sort(rows.begin(), rows.end(),
              [](const Row& a, const Row& b) { return a.xi < b.xi; });
    for (const Row& r : rows) {
        prof.xi.push_back(r.xi);
        prof.phase.push_back(r.phase);
        prof.u1.push_back(r.u1);
        prof.u2.push_back(r.u2);
    }

    // one-cell tolerance from the merged profile's adjacent variation
    for (std::size_t i = 1; i < rows.size(); ++i) {
        prof.one_cell_tol_u1 =
            std::max(prof.one_cell_tol_u1, std::abs(rows[i].u1 - rows[i - 1].u1));
        prof.one_cell_tol_u2 =
            std::max(prof.one_cell_tol_u2, std::abs(rows[i].u2 - rows[i - 1].u2));
    }

    // per-phase monotonicity and edge limits
    const double u_scale =
        std::max(sim.u1_star().values.maxCoeff(), sim.u2_star().values.maxCoeff());
    for (int p = 0; p < n_per; ++p) {
        std::vector<const Row*> col;
        for (const Row& r : rows)
            if (r.p == p) col.push_back(&r);
        if (col.size() < 2) continue;
        std::sort(col.begin(), col.end(),
                  [](const Row* a, const Row* b) { return a->xi < b->xi; });
        for (std::size_t i = 1; i < col.size(); ++i) {
            prof.max_uphill_u1 =
                std::max(prof.max_uphill_u1, col[i]->u1 - col[i - 1]->u1);
            prof.max_downhill_u2 =
                std::max(prof.max_downhill_u2, col[i - 1]->u2 - col[i]->u2);
        }
        const double u1s = sim.u1_star().values[p];
        const double u2s = sim.u2_star().values[p];
        prof.edge_dev_left = std::max(
            prof.edge_dev_left,
            std::max(std::abs(col.front()->u1 - u1s), std::abs(col.front()->u2)));
        prof.edge_dev_right = std::max(
            prof.edge_dev_right,
            std::max(std::abs(col.back()->u1), std::abs(col.back()->u2 - u2s)));
    }

    // deviation of each sample from a quadratic through the three nearest
    // other-phase samples; collapses to interpolation noise when the habitat
    // is homogeneous
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::vector<const Row*> nearest;
        for (std::size_t j = (i >= 8 ? i - 8 : 0); j < std::min(rows.size(), i + 9); ++j) {
            if (j == i || rows[j].p == rows[i].p) continue;
            nearest.push_back(&rows[j]);
        }
        std::sort(nearest.begin(), nearest.end(), [&](const Row* a, const Row* b) {
            return std::abs(a->xi - rows[i].xi) < std::abs(b->xi - rows[i].xi);
        });
        if (nearest.size() < 3) continue;
        const Row* a = nearest[0];
        const Row* b = nearest[1];
        const Row* c = nearest[2];
        const auto lagrange = [&](double fa, double fb, double fc) {
            const double x = rows[i].xi;
            return fa * (x - b->xi) * (x - c->xi) / ((a->xi - b->xi) * (a->xi - c->xi)) +
                   fb * (x - a->xi) * (x - c->xi) / ((b->xi - a->xi) * (b->xi - c->xi)) +
                   fc * (x - a->xi) * (x - b->xi) / ((c->xi - a->xi) * (c->xi - b->xi));
        };
        prof.phase_variation =
            std::max(prof.phase_variation,
                     std::abs(lagrange(a->u1, b->u1, c->u1) - rows[i].u1));
        prof.phase_variation =
            std::max(prof.phase_variation,
                     std::abs(lagrange(a->u2, b->u2, c->u2) - rows[i].u2));
    }

    prof.converged =
        worst_misreg <= 0.1 && prof.registration_rms <= 0.01 * std::max(1.0, u_scale);
    return prof;
}

void write_front_csv(std::ostream& os, const FrontTrace& trace) {
    os << std::setprecision(17);
    os << "t,position\n";
    for (std::size_t i = 0; i < trace.times.size(); ++i)
        os << trace.times[i] << "," << trace.positions[i] << "\n";
}

void write_profile_csv(std::ostream& os, const WaveProfile& profile) {
    os << std::setprecision(17);
    os << "xi,phase,u1,u2\n";
    for (std::size_t i = 0; i < profile.xi.size(); ++i)
        os << profile.xi[i] << "," << profile.phase[i] << "," << profile.u1[i] << ","
           << profile.u2[i] << "\n";
}

void write_distance_csv(std::ostream& os, const PeriodicTrajectory& traj) {
    os << std::setprecision(17);
    os << "t,dist\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i)
        os << traj.times[i] << "," << traj.dist_to_e1[i] << "\n";
}

}  // namespace perspeed
