// Command-line front end: model configs in, JSON reports and plot-ready CSV out.
//
// Exit codes: 0 success, 2 config error, 3 hypothesis failure,
// 4 simulation-quality failure, 1 internal error; bit 4 (value 16) is set
// when the report carries warnings.

#include <chrono>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "perspeed/config.hpp"
#include "perspeed/errors.hpp"
#include "perspeed/habitat.hpp"
#include "perspeed/model.hpp"
#include "perspeed/parallel.hpp"
#include "perspeed/sim.hpp"
#include "perspeed/speeds.hpp"

using nlohmann::ordered_json;
using namespace perspeed;

namespace {

struct ReportBuilder {
    ordered_json report;
    std::vector<std::string> warnings;
    bool want_timings = false;
    ordered_json timings = ordered_json::object();
    std::chrono::steady_clock::time_point mark = std::chrono::steady_clock::now();

    explicit ReportBuilder(const std::string& command) {
        report["command"] = command;
    }
    void stage_done(const std::string& name) {
        const auto now = std::chrono::steady_clock::now();
        timings[name] =
            std::chrono::duration_cast<std::chrono::milliseconds>(now - mark).count();
        mark = now;
    }
    void warn(const std::string& w) { warnings.push_back(w); }
    int emit(int code = 0) {
        report["warnings"] = warnings;
        if (want_timings) report["timings"] = timings;
        std::cout << report.dump(2) << "\n";
        return warnings.empty() ? code : (code | 16);
    }
};

ordered_json speed_json(const SpeedResult& s) {
    return {{"c", s.c},
            {"mu0", s.mu0},
            {"lambda0", s.lambda0},
            {"bracket", {s.bracket.first, s.bracket.second}},
            {"evaluations", s.evaluations}};
}

LambdaFamily family_from_name(const std::string& name) {
    if (name == "lambda1") return LambdaFamily::Lambda1;
    if (name == "lambda2") return LambdaFamily::Lambda2;
    if (name == "lambda0") return LambdaFamily::Lambda0;
    if (name == "lambda_bar") return LambdaFamily::LambdaBar;
    throw ConfigError("family", "expected lambda1|lambda2|lambda0|lambda_bar");
}

void echo_inputs(ReportBuilder& rb, const CompetitionModel& model) {
    rb.report["inputs"] = model_to_json(model);
    rb.report["inputs"]["defaults"] = {{"eigen_tol", 1e-10},
                                       {"steady_state_tol", 1e-9},
                                       {"d2_margin_tol", -1e-10}};
}

void write_file(const std::string& path, const std::function<void(std::ostream&)>& fn) {
    std::ofstream out(path);
    if (!out) throw ConfigError("output", "cannot open '" + path + "' for writing");
    fn(out);
}

int cmd_eig(const std::string& config_path, int species, std::string family_name,
            double mu, const std::string& psi_csv, bool timings) {
    ReportBuilder rb("eig");
    rb.want_timings = timings;
    const CompetitionModel model = load_model_file(config_path);
    echo_inputs(rb, model);
    rb.report["inputs"]["species"] = species;
    rb.report["inputs"]["mu"] = mu;
    rb.stage_done("load");

    EigenPair pair;
    if (!family_name.empty()) {
        rb.report["inputs"]["family"] = family_name;
        const CooperativeModel coop = build_cooperative(model);
        pair = principal_eigenpair(assemble_family(coop, family_from_name(family_name), mu));
    } else {
        const SampledModel sm = sample_model(model);
        const auto& d = (species == 1) ? sm.d1 : sm.d2;
        const auto& g = (species == 1) ? sm.g1 : sm.g2;
        const auto& b = (species == 1) ? sm.b1 : sm.b2;
        pair = principal_eigenpair(EigenProblem(d, g, b, mu));
    }
    rb.stage_done("solve");

    rb.report["results"] = {{"lambda", pair.lambda}, {"residual", pair.residual}};
    if (!psi_csv.empty()) {
        write_file(psi_csv, [&](std::ostream& os) {
            os << std::setprecision(17) << "x,psi\n";
            for (int j = 0; j < pair.psi.grid.n_points; ++j)
                os << pair.psi.grid.node(j) << "," << pair.psi.values[j] << "\n";
        });
        rb.report["results"]["psi_csv"] = psi_csv;
    }
    return rb.emit();
}

int cmd_speed(const std::string& config_path, bool timings) {
    ReportBuilder rb("speed");
    rb.want_timings = timings;
    const CompetitionModel model = load_model_file(config_path);
    echo_inputs(rb, model);
    const SampledModel sm = sample_model(model);
    rb.stage_done("load");

    const H12Report h12 = hypothesis_h1_h2(sm);
    rb.report["results"]["hypotheses"] = {{"lambda_1", h12.lambda_1},
                                          {"lambda_2", h12.lambda_2},
                                          {"lambda_H2", h12.lambda_h2},
                                          {"H1_species1", h12.h1_species1},
                                          {"H1_species2", h12.h1_species2},
                                          {"H2", h12.h2}};
    rb.stage_done("hypotheses");
    if (!h12.h1_species1 || !h12.h1_species2 || !h12.h2) {
        rb.report["results"]["conclusion"] = "hypotheses (H1)/(H2) failed";
        return rb.emit(3);
    }

    const CooperativeModel coop = build_cooperative(sm);
    const DeterminacyCertificate cert = determinacy_certificate(coop);
    rb.stage_done("certificate");

    ordered_json res;
    res["c0_plus"] = cert.c0_plus;
    res["mu0"] = cert.mu0;
    res["lambda0_mu0"] = cert.lambda0_mu0;
    res["lambda_bar_mu0"] = cert.lambda_bar_mu0;
    res["D1"] = cert.d1_holds;
    res["D2"] = cert.d2_holds;
    res["ratio_min"] = cert.ratio_min;
    if (cert.d1_holds && cert.d2_holds)
        res["conclusion"] = "linearly determinate: cbar_plus = c0_plus";
    else
        res["conclusion"] = "not certified linearly determinate: c0_plus is a lower bound";
    rb.report["results"].update(res);
    return rb.emit();
}

int cmd_check(const std::string& config_path, bool timings) {
    ReportBuilder rb("check");
    rb.want_timings = timings;
    const CompetitionModel model = load_model_file(config_path);
    echo_inputs(rb, model);
    const SampledModel sm = sample_model(model);
    rb.stage_done("load");

    const H12Report h12 = hypothesis_h1_h2(sm);
    rb.report["results"]["H1"] = {{"lambda_1", h12.lambda_1},
                                  {"lambda_2", h12.lambda_2},
                                  {"species1", h12.h1_species1},
                                  {"species2", h12.h1_species2},
                                  {"species1_implied_by_H2", h12.h1_species1_implied_by_h2}};
    rb.report["results"]["H2"] = {{"lambda_H2", h12.lambda_h2}, {"holds", h12.h2}};

    const H3Report h3 = classify_h3(sm);
    const char* status = h3.status == H3Status::VerifiedConstant
                             ? "verified (constant coefficients)"
                             : h3.status == H3Status::VerifiedSingleResource
                                   ? "verified (single-resource class)"
                                   : "assumed, not verified";
    rb.report["results"]["H3"] = {{"status", status}, {"holds", h3.holds}};
    rb.stage_done("h1-h3");

    if (h12.h1_species1 && h12.h1_species2 && h12.h2) {
        const CooperativeModel coop = build_cooperative(sm);
        const H4Report h4 = check_h4(coop);
        rb.report["results"]["H4"] = {{"c1_plus", speed_json(h4.c1_plus)},
                                      {"c2_minus", speed_json(h4.c2_minus)},
                                      {"holds", h4.holds}};
        const H5Report h5 = check_h5(coop);
        rb.report["results"]["H5"] = {{"lambda2_at_zero", h5.lambda2_at_zero},
                                      {"slope_at_zero", h5.slope_at_zero},
                                      {"c1_plus", h5.c1_plus},
                                      {"holds", h5.holds}};
        rb.stage_done("h4-h5");
    } else {
        rb.report["results"]["H4"] = "skipped: (H1)/(H2) failed";
        rb.report["results"]["H5"] = "skipped: (H1)/(H2) failed";
        rb.warn("hypotheses (H1)/(H2) failed; H4/H5 not evaluated");
    }
    return rb.emit();
}

int cmd_simulate(const std::string& config_path, SimulationConfig sim_cfg,
                 bool periodic_ivp, double ivp_frac1, double ivp_frac2,
                 bool with_profile, const std::string& front_csv,
                 const std::string& profile_csv, const std::string& dist_csv,
                 bool timings) {
    ReportBuilder rb("simulate");
    rb.want_timings = timings;
    const CompetitionModel model = load_model_file(config_path);
    echo_inputs(rb, model);
    rb.report["inputs"]["sim"] = {{"x_min", sim_cfg.x_min},
                                  {"x_max", sim_cfg.x_max},
                                  {"dx", sim_cfg.dx},
                                  {"dt", sim_cfg.dt},
                                  {"t_final", sim_cfg.t_final},
                                  {"theta", sim_cfg.theta},
                                  {"scheme", sim_cfg.scheme == Scheme::Imex ? "imex" : "explicit"},
                                  {"output_interval", sim_cfg.output_interval},
                                  {"fit_window_fraction", 0.5}};
    rb.stage_done("load");

    if (periodic_ivp) {
        const SampledModel sm = sample_model(model);
        const SteadyStates ss = steady_states(sm);
        const GridFunction u1_init(sm.grid, ivp_frac1 * ss.u1_star.values);
        const GridFunction u2_init(sm.grid, ivp_frac2 * ss.u2_star.values);
        const PeriodicTrajectory traj =
            run_periodic_ivp(model, u1_init, u2_init, sim_cfg.t_final, sim_cfg.scheme);
        rb.stage_done("periodic-ivp");
        rb.report["results"]["final_distance_to_E1"] = traj.dist_to_e1.back();
        rb.report["results"]["t_final"] = traj.times.back();
        if (!dist_csv.empty()) {
            write_file(dist_csv, [&](std::ostream& os) { write_distance_csv(os, traj); });
            rb.report["results"]["dist_csv"] = dist_csv;
        }
        return rb.emit();
    }

    if (sim_cfg.x_max - sim_cfg.x_min < 20.0 * model.L)
        rb.warn("domain shorter than 20 habitat periods");

    const FrontTrace trace = measure_speed(model, sim_cfg);
    rb.stage_done("measure-speed");
    rb.report["results"]["fitted_speed"] = trace.fitted_speed;
    rb.report["results"]["fit_window"] = {trace.fit_window.first, trace.fit_window.second};
    rb.report["results"]["fit_residual"] = trace.fit_residual;
    rb.report["results"]["theta"] = trace.theta;

    const CooperativeModel coop = build_cooperative(model);
    const SpeedResult c0 = lower_bound_report(coop);
    rb.stage_done("lower-bound");
    rb.report["results"]["c0_plus"] = c0.c;
    rb.report["results"]["fitted_over_c0"] = trace.fitted_speed / c0.c;
    if (trace.fitted_speed < c0.c * 0.95)
        rb.warn("fitted speed below the certified lower bound by more than 5%");

    if (!front_csv.empty()) {
        write_file(front_csv, [&](std::ostream& os) { write_front_csv(os, trace); });
        rb.report["results"]["front_csv"] = front_csv;
    }
    if (with_profile) {
        const WaveProfile prof = extract_profile(model, sim_cfg, trace.fitted_speed);
        rb.stage_done("profile");
        rb.report["results"]["profile"] = {
            {"registration_rms", prof.registration_rms},
            {"converged", prof.converged},
            {"max_uphill_u1", prof.max_uphill_u1},
            {"max_downhill_u2", prof.max_downhill_u2},
            {"one_cell_tol_u1", prof.one_cell_tol_u1},
            {"one_cell_tol_u2", prof.one_cell_tol_u2},
            {"edge_dev_left", prof.edge_dev_left},
            {"edge_dev_right", prof.edge_dev_right},
            {"phase_variation", prof.phase_variation}};
        if (!prof.converged) rb.warn("profile not converged: registration residual high");
        if (!profile_csv.empty()) {
            write_file(profile_csv, [&](std::ostream& os) { write_profile_csv(os, prof); });
            rb.report["results"]["profile"]["csv"] = profile_csv;
        }
    }
    return rb.emit();
}

int cmd_habitat(double l1, double l2, double a, double c, double d2,
                const std::string& scan_csv, bool timings) {
    ReportBuilder rb("habitat");
    rb.want_timings = timings;
    const HabitatSpec spec(l1, l2, a, c, d2);
    rb.report["inputs"] = {{"l1", l1}, {"l2", l2}, {"a", a}, {"c", c}, {"d2", d2}};
    const DispersionResult disp = dispersion_speed(spec);
    rb.stage_done("dispersion");
    rb.report["results"] = {{"lambda0", disp.lambda0},
                            {"mu0", disp.mu0},
                            {"c0_plus", disp.c0_plus},
                            {"small_period_approx", small_period_speed(spec)},
                            {"stationarity_residual", disp.stationarity_residual},
                            {"branch_notes", disp.branch_notes}};
    if (!scan_csv.empty()) {
        write_file(scan_csv, [&](std::ostream& os) {
            os << std::setprecision(17) << "lambda,G,mu,s\n";
            const double lam_lo = 0.25 * disp.lambda0;
            const double lam_hi = 4.0 * disp.lambda0;
            const int rows = 400;
            for (int i = 0; i <= rows; ++i) {
                const double lam = lam_lo + (lam_hi - lam_lo) * i / rows;
                const double G = g_of_lambda(spec, lam);
                const double mu = mu_of_lambda(spec, lam);
                double s = std::numeric_limits<double>::quiet_NaN();
                if (mu > 0.0) {
                    const double step = 1e-5 * std::max(1.0, std::abs(lam));
                    const double mm = mu_of_lambda(spec, lam - step);
                    const double mp = mu_of_lambda(spec, lam + step);
                    if (!std::isnan(mm) && !std::isnan(mp))
                        s = (mp - mm) / (2.0 * step) * lam / mu;
                }
                os << lam << "," << G << "," << mu << "," << s << "\n";
            }
        });
        rb.report["results"]["scan_csv"] = scan_csv;
    }
    return rb.emit();
}

int cmd_lambda_curve(const std::string& config_path, const std::string& family_name,
                     double mu_min, double mu_max, int n_mu, const std::string& out,
                     bool timings) {
    ReportBuilder rb("lambda-curve");
    rb.want_timings = timings;
    const CompetitionModel model = load_model_file(config_path);
    const LambdaFamily family = family_from_name(family_name);
    const CooperativeModel coop = build_cooperative(model);
    if (n_mu < 2) throw ConfigError("n", "need at least 2 samples");

    std::vector<double> mus(n_mu), lams(n_mu);
    for (int i = 0; i < n_mu; ++i)
        mus[i] = mu_min + (mu_max - mu_min) * i / (n_mu - 1);
    parallel_for(n_mu, [&](int i) { lams[i] = lambda_of_mu(coop, family, mus[i]); });

    const auto print_csv = [&](std::ostream& os) {
        os << std::setprecision(17) << "mu,lambda,lambda_over_mu\n";
        for (int i = 0; i < n_mu; ++i)
            os << mus[i] << "," << lams[i] << ","
               << (mus[i] != 0.0 ? lams[i] / mus[i] : std::numeric_limits<double>::quiet_NaN())
               << "\n";
    };
    if (out.empty()) {
        print_csv(std::cout);
        return 0;
    }
    write_file(out, print_csv);
    echo_inputs(rb, model);
    rb.report["inputs"]["family"] = family_name;
    rb.report["inputs"]["mu_range"] = {mu_min, mu_max};
    rb.report["inputs"]["n_mu"] = n_mu;
    rb.report["results"] = {{"csv", out}};
    return rb.emit();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spreading speeds, eigenvalue certificates and invasion fronts "
                 "for two-species competition in a periodic habitat"};
    app.require_subcommand(1);
    bool timings = false;
    app.add_flag("--timings", timings, "include wall-clock timings in the report");

    std::string config_path, family, psi_csv, front_csv, profile_csv, dist_csv, out_csv;
    int species = 1;
    double mu = 0.0;

    auto* eig = app.add_subcommand("eig", "principal eigenvalue of one species' operator");
    eig->add_option("--config", config_path)->required();
    eig->add_option("--species", species)->check(CLI::Range(1, 2));
    eig->add_option("--mu", mu);
    eig->add_option("--family", family,
                    "override: lambda1|lambda2|lambda0|lambda_bar (uses u2*)");
    eig->add_option("--psi-csv", psi_csv, "write the eigenfunction as CSV (x, psi)");

    auto* speed = app.add_subcommand("speed", "spreading speed and determinacy certificate");
    speed->add_option("--config", config_path)->required();

    auto* check = app.add_subcommand("check", "full hypothesis audit (H1)-(H5)");
    check->add_option("--config", config_path)->required();

    SimulationConfig sim_cfg;
    bool periodic_ivp = false, with_profile = false;
    double ivp_frac1 = 0.1, ivp_frac2 = 0.9;
    std::string scheme_name = "imex";
    auto* simulate = app.add_subcommand("simulate", "invasion front or periodic attractivity run");
    simulate->add_option("--config", config_path)->required();
    simulate->add_option("--x-min", sim_cfg.x_min);
    simulate->add_option("--x-max", sim_cfg.x_max);
    simulate->add_option("--dx", sim_cfg.dx);
    simulate->add_option("--dt", sim_cfg.dt, "0 selects the automatic step");
    simulate->add_option("--t-final", sim_cfg.t_final);
    simulate->add_option("--theta", sim_cfg.theta);
    simulate->add_option("--scheme", scheme_name)->check(CLI::IsMember({"imex", "explicit"}));
    simulate->add_flag("--profile", with_profile, "also extract the wave profile");
    simulate->add_flag("--periodic-ivp", periodic_ivp,
                       "attractivity experiment on one period instead of an invasion run");
    simulate->add_option("--ivp-frac1", ivp_frac1);
    simulate->add_option("--ivp-frac2", ivp_frac2);
    simulate->add_option("--front-csv", front_csv);
    simulate->add_option("--profile-csv", profile_csv);
    simulate->add_option("--dist-csv", dist_csv);

    double l1 = 0.5, l2 = 0.5, a = 0.5, c = 0.5, d2 = 2.0;
    std::string scan_csv;
    auto* habitat = app.add_subcommand("habitat", "closed-form dispersion speed for the two-patch habitat");
    habitat->add_option("--l1", l1);
    habitat->add_option("--l2", l2);
    habitat->add_option("--a", a);
    habitat->add_option("--c", c);
    habitat->add_option("--d2", d2);
    habitat->add_option("--scan-csv", scan_csv, "write (lambda, G, mu, s) rows");

    double mu_min = -2.0, mu_max = 2.0;
    int n_mu = 41;
    auto* curve = app.add_subcommand("lambda-curve", "(mu, lambda, lambda/mu) rows for one family");
    curve->add_option("--config", config_path)->required();
    curve->add_option("--family", family)->required();
    curve->add_option("--mu-min", mu_min);
    curve->add_option("--mu-max", mu_max);
    curve->add_option("--n", n_mu);
    curve->add_option("--out", out_csv, "CSV path (default: CSV to stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*eig) return cmd_eig(config_path, species, family, mu, psi_csv, timings);
        if (*speed) return cmd_speed(config_path, timings);
        if (*check) return cmd_check(config_path, timings);
        if (*simulate) {
            sim_cfg.scheme = scheme_name == "explicit" ? Scheme::Explicit : Scheme::Imex;
            return cmd_simulate(config_path, sim_cfg, periodic_ivp, ivp_frac1, ivp_frac2,
                                with_profile, front_csv, profile_csv, dist_csv, timings);
        }
        if (*habitat) return cmd_habitat(l1, l2, a, c, d2, scan_csv, timings);
        if (*curve)
            return cmd_lambda_curve(config_path, family, mu_min, mu_max, n_mu, out_csv, timings);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const HypothesisError& e) {
        std::cerr << "hypothesis failure: " << e.what() << "\n";
        return 3;
    } catch (const SimulationQualityError& e) {
        std::cerr << "simulation quality failure: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
