#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "cradle/cradle.hpp"

namespace cradle::cli {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

struct FlagDef {
    const char* flag;
    const char* key;
    std::vector<std::string> commands;  ///< empty: every command
};

const std::vector<FlagDef>& flag_table() {
    static const std::vector<FlagDef> flags = {
        {"--alpha", "potential.alpha", {}},
        {"--k-minus", "potential.k_minus", {}},
        {"--k-plus", "potential.k_plus", {}},
        {"--w-minus", "potential.w_minus", {}},
        {"--w-plus", "potential.w_plus", {}},
        {"--beta", "potential.beta", {}},
        {"--g", "potential.g", {}},
        {"--gamma", "potential.gamma", {}},
        {"--out", "run.out", {}},
        {"--seed", "run.seed", {}},
        {"--jobs", "run.jobs", {}},
        {"--tol", "run.tol", {}},

        {"--init", "lattice.init", {"simulate-lattice"}},
        {"--eps", "lattice.eps", {"simulate-lattice"}},
        {"--pad", "lattice.pad", {"simulate-lattice"}},
        {"--t-end", "lattice.t_end", {"simulate-lattice"}},
        {"--samples", "lattice.samples", {"simulate-lattice"}},
        {"--boundary", "lattice.boundary", {"simulate-lattice"}},
        {"--csv", "lattice.csv", {"simulate-lattice"}},

        {"--init", "dps.init", {"simulate-dps"}},
        {"--eps", "dps.eps", {"simulate-dps"}},
        {"--pad", "dps.pad", {"simulate-dps"}},
        {"--tau-end", "dps.tau_end", {"simulate-dps"}},
        {"--samples", "dps.samples", {"simulate-dps"}},
        {"--boundary", "dps.boundary", {"simulate-dps"}},

        {"--centering", "breather.centering", {"simulate-lattice", "simulate-dps", "breather", "scaling", "persistence"}},
        {"--half-width", "breather.half_width", {"simulate-lattice", "simulate-dps", "breather", "scaling", "persistence"}},
        {"--damping", "breather.damping", {"breather"}},
        {"--q", "breather.q", {"breather"}},
        {"--export-loop", "breather.export_loop", {"breather"}},
        {"--max-harmonic", "ansatz.max_harmonic", {"breather", "scaling"}},
        {"--time-samples", "ansatz.n_time_samples", {"breather", "scaling"}},

        {"--mode", "scaling.mode", {"scaling"}},
        {"--eps-list", "scaling.epsilons", {"scaling"}},
        {"--horizon", "scaling.T", {"scaling"}},
        {"--norm", "scaling.norm", {"scaling"}},
        {"--pad", "scaling.pad", {"scaling"}},
        {"--samples", "scaling.samples", {"scaling"}},

        {"--eps-list", "persistence.epsilons", {"persistence"}},
        {"--horizon", "persistence.T", {"persistence"}},
        {"--norm", "persistence.norm", {"persistence"}},
        {"--pad", "persistence.pad", {"persistence"}},
        {"--samples", "persistence.samples", {"persistence"}},

        {"--sites", "impulse.N", {"impulse", "simulate-lattice", "simulate-dps"}},
        {"--v-i", "impulse.v_i", {"impulse", "simulate-lattice", "simulate-dps"}},
        {"--mu", "impulse.mu", {"impulse"}},
        {"--nu", "impulse.nu", {"impulse"}},
        {"--samples", "impulse.samples", {"impulse"}},
    };
    return flags;
}

const std::map<std::string, std::string>& command_help() {
    static const std::map<std::string, std::string> help = {
        {"omega0", "print omega_0 by the closed form and by quadrature"},
        {"simulate-lattice", "integrate the chain and export the trajectory"},
        {"simulate-dps", "integrate the amplitude equation and export amplitudes and invariants"},
        {"breather", "solve the stationary amplitude equation and certify the profile"},
        {"scaling", "approximation error or residual against eps, with fitted slope"},
        {"persistence", "normalized deviation of the chain from a breather orbit"},
        {"impulse", "non-dispersion of a localized velocity kick"},
    };
    return help;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json number(double v) { return std::isfinite(v) ? json(v) : json(v > 0 ? "inf" : (v < 0 ? "-inf" : "nan")); }

class CsvWriter {
public:
    CsvWriter(const fs::path& path, const std::vector<std::string>& header) : out_(path) {
        if (!out_) throw std::runtime_error("cannot write " + path.string());
        for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
        out_ << '\n';
    }
    void row(std::initializer_list<double> values) {
        bool first = true;
        for (double v : values) {
            out_ << (first ? "" : ",") << fmt(v);
            first = false;
        }
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

// Same layout as json::dump(2), but floats always carry 17 significant digits.
void emit(std::ostream& o, const json& j, int depth) {
    const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
    const std::string close(static_cast<std::size_t>(2 * depth), ' ');
    if (j.is_object()) {
        if (j.empty()) {
            o << "{}";
            return;
        }
        o << "{\n";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            o << (first ? "" : ",\n") << pad << json(it.key()).dump() << ": ";
            emit(o, it.value(), depth + 1);
            first = false;
        }
        o << "\n" << close << "}";
    } else if (j.is_array()) {
        if (j.empty()) {
            o << "[]";
            return;
        }
        o << "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
            o << (i ? ",\n" : "") << pad;
            emit(o, j[i], depth + 1);
        }
        o << "\n" << close << "]";
    } else if (j.is_number_float()) {
        o << fmt(j.get<double>());
    } else {
        o << j.dump();
    }
}

std::string to_text(const json& j) {
    std::ostringstream o;
    emit(o, j, 0);
    return o.str();
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << to_text(j) << '\n';
}

struct Context {
    std::string command;
    const Config& config;
    fs::path out_dir;
    std::ostream& out;

    [[nodiscard]] json summary() const {
        json j;
        j["command"] = command;
        j["config"] = config.to_json();
        return j;
    }
};

PotentialSpec potential_from(const Config& c) {
    PotentialSpec s;
    s.alpha = c.real("potential.alpha");
    s.k_minus = c.real("potential.k_minus");
    s.k_plus = c.real("potential.k_plus");
    s.w_minus = c.real("potential.w_minus");
    s.w_plus = c.real("potential.w_plus");
    s.beta = c.real("potential.beta");
    s.g = c.real("potential.g");
    s.gamma = c.real("potential.gamma");
    s.validate();
    return s;
}

double positive(const Config& c, const std::string& key) {
    const double v = c.real(key);
    if (!(v > 0.0)) throw ConfigError(key + " must be > 0");
    return v;
}

BreatherProfile profile_from(const Config& c, const PotentialSpec& spec, double damping = 1.0) {
    const long long hw = c.integer("breather.half_width");
    if (hw < 8) throw ConfigError("breather.half_width must be >= 8");
    return solve_stationary(spec.alpha, parse_centering(c.text("breather.centering")), static_cast<int>(hw), damping);
}

json profile_json(const BreatherProfile& v) {
    json j;
    j["centering"] = std::string(to_string(v.centering));
    j["half_width"] = v.half_width();
    j["residual_norm"] = v.residual_norm;
    j["newton_iterations"] = v.newton_iterations;
    j["seed_amplitude"] = v.seed;
    j["center_value"] = v.at(0);
    return j;
}

std::vector<double> uniform_times(double end, std::size_t samples) {
    std::vector<double> t(samples + 1);
    for (std::size_t j = 0; j <= samples; ++j)
        t[j] = end * static_cast<double>(j) / static_cast<double>(samples);
    t.back() = end;
    return t;
}

int cmd_omega0(const Context& ctx) {
    const PotentialSpec spec = potential_from(ctx.config);
    const double closed = omega0(spec);
    const QuadratureResult q = wallis_quadrature(spec.alpha);
    const double quad = (spec.k_minus + spec.k_plus) * std::pow(2.0, (spec.alpha - 3.0) / 2.0) * q.value;
    const double diff = std::abs(closed - quad);
    ctx.out << "omega0 = " << fmt(closed) << "\nquadrature = " << fmt(quad) << "\n|difference| = " << fmt(diff)
            << "\n";
    json j = ctx.summary();
    j["omega0"] = closed;
    j["omega0_quadrature"] = quad;
    j["abs_difference"] = diff;
    j["c_alpha"] = c_alpha_closed_form(spec.alpha);
    j["quadrature_nodes"] = q.nodes;
    j["quadrature_error_estimate"] = q.error_estimate;
    write_json(ctx.out_dir / "summary.json", j);
    return ExitCode::ok;
}

int cmd_simulate_lattice(const Context& ctx) {
    const Config& c = ctx.config;
    const PotentialSpec spec = potential_from(c);
    const double tol = positive(c, "run.tol");
    const double t_end = positive(c, "lattice.t_end");
    const std::size_t samples = std::max<std::size_t>(c.count("lattice.samples"), 1);
    const std::size_t pad = c.count("lattice.pad");
    const Boundary boundary = parse_boundary(c.text("lattice.boundary"));
    const std::string init = c.text("lattice.init");
    const std::string csv = c.text("lattice.csv");
    if (csv != "long" && csv != "norms") throw ConfigError("lattice.csv must be long or norms, got '" + csv + "'");

    json j = ctx.summary();
    LatticeState X0;
    if (init == "breather") {
        const BreatherProfile v = profile_from(c, spec);
        X0 = lattice_breather(v, positive(c, "lattice.eps"), spec, 0.0, pad);
        j["profile"] = profile_json(v);
    } else if (init == "impulse") {
        const long long N = c.integer("impulse.N");
        if (N < 1) throw ConfigError("impulse.N must be >= 1");
        X0 = LatticeState(1 - static_cast<int>(pad), static_cast<std::size_t>(N) + 2 * pad);
        for (int n = 1; n <= N; ++n) X0.v[X0.index(n)] = c.real("impulse.v_i");
    } else {
        throw ConfigError("lattice.init must be breather or impulse, got '" + init + "'");
    }
    X0.boundary = boundary;

    const auto times = uniform_times(t_end, samples);
    const Trajectory traj = integrate_lattice(X0, spec, times, tol);
    const double h0 = hamiltonian(X0, spec);
    double drift = 0.0;
    if (csv == "long") {
        CsvWriter w(ctx.out_dir / "trajectory.csv", {"t", "n", "x", "xdot"});
        for (std::size_t k = 0; k < traj.times.size(); ++k) {
            const auto& X = traj.states[k];
            for (std::size_t i = 0; i < X.size(); ++i)
                w.row({traj.times[k], static_cast<double>(X.n_lo + static_cast<int>(i)), X.x[i], X.v[i]});
        }
    } else {
        CsvWriter w(ctx.out_dir / "norms.csv", {"t", "hamiltonian", "norm_1", "norm_2", "norm_inf", "edge_inf"});
        for (std::size_t k = 0; k < traj.times.size(); ++k) {
            const auto& X = traj.states[k];
            w.row({traj.times[k], hamiltonian(X, spec), pair_norm(X, Norm::l1), pair_norm(X, Norm::l2),
                   pair_norm(X, Norm::linf), edge_modulus(X, 4)});
        }
    }
    for (const auto& X : traj.states) drift = std::max(drift, std::abs(hamiltonian(X, spec) - h0));
    if (h0 != 0.0) drift /= std::abs(h0);

    j["sites"] = X0.size();
    j["n_lo"] = X0.n_lo;
    j["hamiltonian_initial"] = h0;
    j["hamiltonian_relative_drift"] = drift;
    j["accepted_steps"] = traj.stats.accepted;
    j["rejected_steps"] = traj.stats.rejected;
    j["largest_step"] = traj.stats.largest_step;
    j["max_edge_ratio"] = traj.max_edge_ratio;
    j["boundary_contaminated"] = traj.boundary_contaminated;
    write_json(ctx.out_dir / "summary.json", j);
    ctx.out << "H relative drift " << fmt(drift) << " over t in [0, " << fmt(t_end) << "]\n";
    if (traj.boundary_contaminated) ctx.out << "warning: boundary contamination, edge ratio " << fmt(traj.max_edge_ratio) << "\n";
    return ExitCode::ok;
}

int cmd_simulate_dps(const Context& ctx) {
    const Config& c = ctx.config;
    const PotentialSpec spec = potential_from(c);
    const double tol = positive(c, "run.tol");
    const double tau_end = positive(c, "dps.tau_end");
    const std::size_t samples = std::max<std::size_t>(c.count("dps.samples"), 1);
    const std::size_t pad = c.count("dps.pad");
    const Boundary boundary = parse_boundary(c.text("dps.boundary"));
    const std::string init = c.text("dps.init");

    json j = ctx.summary();
    Amplitude a0;
    if (init == "breather") {
        const BreatherProfile v = profile_from(c, spec);
        a0 = profile_amplitude(v, positive(c, "dps.eps"), pad);
        j["profile"] = profile_json(v);
    } else if (init == "impulse") {
        const long long N = c.integer("impulse.N");
        if (N < 1) throw ConfigError("impulse.N must be >= 1");
        const double v_i = c.real("impulse.v_i");
        const double eps = std::abs(v_i) * std::sqrt(static_cast<double>(N));
        if (eps == 0.0) throw ConfigError("impulse.v_i must be nonzero");
        a0 = Amplitude(1 - static_cast<int>(pad), static_cast<std::size_t>(N) + 2 * pad);
        for (int n = 1; n <= N; ++n) a0.a[a0.index(n)] = cplx{0.0, -v_i / (std::sqrt(2.0) * eps)};
    } else {
        throw ConfigError("dps.init must be breather or impulse, got '" + init + "'");
    }
    a0.boundary = boundary;

    const auto taus = uniform_times(tau_end, samples);
    const DpsTrajectory traj = integrate_dps(a0, spec, taus, tol);
    const DpsInvariants inv0 = dps_invariants(a0, spec);
    double l2_drift = 0.0, bond_drift = 0.0, momentum_drift = 0.0, min_linf = a0.sup_norm();
    {
        CsvWriter amp(ctx.out_dir / "amplitude.csv", {"tau", "n", "re_a", "im_a"});
        CsvWriter invw(ctx.out_dir / "invariants.csv",
                       {"tau", "l2_norm_sq", "bond_norm", "re_momentum", "im_momentum", "hamiltonian", "linf"});
        for (std::size_t k = 0; k < traj.taus.size(); ++k) {
            const Amplitude& a = traj.amplitudes[k];
            for (std::size_t i = 0; i < a.size(); ++i)
                amp.row({traj.taus[k], static_cast<double>(a.n_lo + static_cast<int>(i)), a.a[i].real(), a.a[i].imag()});
            const DpsInvariants inv = dps_invariants(a, spec);
            invw.row({traj.taus[k], inv.l2_norm_sq, inv.bond_norm, inv.momentum.real(), inv.momentum.imag(),
                      inv.hamiltonian, a.sup_norm()});
            l2_drift = std::max(l2_drift, std::abs(inv.l2_norm_sq - inv0.l2_norm_sq) / inv0.l2_norm_sq);
            if (inv0.bond_norm > 0.0)
                bond_drift = std::max(bond_drift, std::abs(inv.bond_norm - inv0.bond_norm) / inv0.bond_norm);
            momentum_drift = std::max(momentum_drift, std::abs(inv.momentum - inv0.momentum));
            min_linf = std::min(min_linf, a.sup_norm());
        }
    }
    const LinfBounds bounds = linf_lower_bound(a0, spec.alpha);
    j["sites"] = a0.size();
    j["l2_norm_sq_relative_drift"] = l2_drift;
    j["bond_norm_relative_drift"] = bond_drift;
    j["momentum_abs_drift"] = momentum_drift;
    j["min_linf"] = min_linf;
    j["linf_lower_bound"] = bounds.conservation_bound;
    j["linf_quotient_bound"] = bounds.quotient_bound;
    j["existence_time_linf"] = number(existence_time(a0.sup_norm(), spec));
    j["accepted_steps"] = traj.stats.accepted;
    write_json(ctx.out_dir / "summary.json", j);
    ctx.out << "relative drift: l2 " << fmt(l2_drift) << ", bonds " << fmt(bond_drift) << "\n"
            << "min ||a||_inf " << fmt(min_linf) << " >= bound " << fmt(bounds.conservation_bound) << "\n";
    return ExitCode::ok;
}

int cmd_breather(const Context& ctx) {
    const Config& c = ctx.config;
    const PotentialSpec spec = potential_from(c);
    const double q = c.real("breather.q");
    if (!(q > 0.0 && q < 1.0)) throw ConfigError("breather.q must lie in (0, 1)");
    const double damping = c.real("breather.damping");
    if (!(damping > 0.0 && damping <= 1.0)) throw ConfigError("breather.damping must lie in (0, 1]");
    const BreatherProfile v = profile_from(c, spec, damping);

    {
        CsvWriter w(ctx.out_dir / "profile.csv", {"n", "v_n"});
        for (int n = v.n_lo; n <= v.n_hi(); ++n) w.row({static_cast<double>(n), v.at(n)});
    }
    const ProfileChecks checks = check_profile(v);
    const auto cert = decay_certificate(v, spec.alpha, q);
    const Amplitude a = profile_amplitude(v);
    const Amplitude lap = p_laplacian(a, spec.alpha);
    double recomputed = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) recomputed = std::max(recomputed, std::abs(a.a[i] + lap.a[i]));

    json j = ctx.summary();
    j["profile"] = profile_json(v);
    j["residual_norm"] = v.residual_norm;
    j["residual_p_laplacian"] = recomputed;
    j["symmetric"] = checks.symmetric;
    j["sign_alternating"] = checks.alternating;
    j["monotone"] = checks.monotone;
    j["support_half_width"] = checks.support_hi;
    j["decay_certificate_n0"] = cert ? json(*cert) : json(nullptr);
    j["omega0"] = omega0(spec);

    if (c.boolean("breather.export_loop")) {
        AnsatzParams p;
        p.spec = spec;
        p.max_harmonic = static_cast<int>(c.integer("ansatz.max_harmonic"));
        p.n_time_samples = c.count("ansatz.n_time_samples");
        const LoopField Y1 = corrector(a, p);
        CsvWriter w(ctx.out_dir / "loop.csv", {"k", "n", "re_x", "im_x", "re_xdot", "im_xdot"});
        for (int k = -Y1.max_harmonic; k <= Y1.max_harmonic; ++k) {
            const auto& m = Y1.mode(k);
            for (std::size_t i = 0; i < Y1.sites; ++i)
                w.row({static_cast<double>(k), static_cast<double>(Y1.n_lo + static_cast<int>(i)), m.first[i].real(),
                       m.first[i].imag(), m.second[i].real(), m.second[i].imag()});
        }
        j["loop_aliasing_suspect"] = Y1.aliasing_suspect;
    }
    write_json(ctx.out_dir / "summary.json", j);
    ctx.out << "residual " << fmt(v.residual_norm) << ", v_0 = " << fmt(v.at(0)) << ", certificate n0 = "
            << (cert ? std::to_string(*cert) : std::string("none")) << "\n";
    return ExitCode::ok;
}

json run_json(const RunResult& r) {
    json j;
    j["value"] = r.value;
    j["horizon"] = r.horizon;
    j["max_edge_ratio"] = r.max_edge_ratio;
    j["boundary_contaminated"] = r.boundary_contaminated;
    j["aliasing_suspect"] = r.aliasing_suspect;
    return j;
}

ExperimentOptions experiment_options(const Config& c, const std::string& section) {
    ExperimentOptions o;
    o.n_samples = c.count(section + ".samples");
    if (o.n_samples < 64) throw ConfigError(section + ".samples must be >= 64");
    o.seed = static_cast<std::uint64_t>(c.integer("run.seed"));
    o.jobs = std::max<std::size_t>(c.count("run.jobs"), 1);
    o.max_harmonic = static_cast<int>(c.integer("ansatz.max_harmonic"));
    o.n_time_samples = c.count("ansatz.n_time_samples");
    return o;
}

int cmd_scaling(const Context& ctx) {
    const Config& c = ctx.config;
    const PotentialSpec spec = potential_from(c);
    const double tol = positive(c, "run.tol");
    const ScalingMode mode = parse_scaling_mode(c.text("scaling.mode"));
    const Norm p = parse_norm(c.text("scaling.norm"));
    const double T = c.real("scaling.T");
    const ExperimentOptions opt = experiment_options(c, "scaling");
    const BreatherProfile v = profile_from(c, spec);
    const Amplitude a0 = profile_amplitude(v, 1.0, c.count("scaling.pad"));

    const ScalingReport rep = scaling_study(spec, a0, c.list("scaling.epsilons"), T, p, tol, mode, opt);
    json j = ctx.summary();
    j["profile"] = profile_json(v);
    j["mode"] = std::string(to_string(mode));
    j["norm_p"] = to_string(p);
    j["epsilons"] = rep.epsilons;
    j["errors"] = rep.errors;
    j["horizons"] = rep.horizons;
    std::vector<double> normalized;
    for (std::size_t i = 0; i < rep.epsilons.size(); ++i)
        normalized.push_back(rep.errors[i] / std::pow(rep.epsilons[i], rep.predicted_slope));
    j["normalized_errors"] = normalized;
    j["runs"] = json::array();
    for (const auto& r : rep.runs) j["runs"].push_back(run_json(r));
    j["fitted_slope"] = rep.fitted_slope;
    j["fitted_intercept"] = rep.fitted_intercept;
    j["predicted_slope"] = rep.predicted_slope;
    write_json(ctx.out_dir / "summary.json", j);
    ctx.out << to_string(mode) << " slope " << fmt(rep.fitted_slope) << " (predicted " << fmt(rep.predicted_slope)
            << ")\n";
    return ExitCode::ok;
}

int cmd_persistence(const Context& ctx) {
    const Config& c = ctx.config;
    const PotentialSpec spec = potential_from(c);
    const double tol = positive(c, "run.tol");
    const Norm p = parse_norm(c.text("persistence.norm"));
    const double T = c.real("persistence.T");
    const ExperimentOptions opt = experiment_options(c, "persistence");
    const BreatherProfile v = profile_from(c, spec);
    auto eps = c.list("persistence.epsilons");
    std::sort(eps.begin(), eps.end(), std::greater<>());

    std::vector<RunResult> runs(eps.size());
    parallel_for(eps.size(), opt.jobs, [&](std::size_t i) {
        runs[i] = breather_persistence(spec, v, eps[i], T, p, tol, c.count("persistence.pad"), opt);
    });
    double lo = INFINITY, hi = 0.0;
    json j = ctx.summary();
    j["profile"] = profile_json(v);
    j["epsilons"] = eps;
    j["runs"] = json::array();
    for (const auto& r : runs) {
        j["runs"].push_back(run_json(r));
        lo = std::min(lo, r.value);
        hi = std::max(hi, r.value);
    }
    const double ratio = lo > 0.0 ? hi / lo : INFINITY;
    j["max_min_ratio"] = number(ratio);
    write_json(ctx.out_dir / "summary.json", j);
    for (std::size_t i = 0; i < eps.size(); ++i)
        ctx.out << "eps " << fmt(eps[i]) << ": normalized deviation " << fmt(runs[i].value) << "\n";
    ctx.out << "max/min ratio " << fmt(ratio) << "\n";
    return ExitCode::ok;
}

int cmd_impulse(const Context& ctx) {
    const Config& c = ctx.config;
    const PotentialSpec spec = potential_from(c);
    const double tol = positive(c, "run.tol");
    const long long N = c.integer("impulse.N");
    if (N < 1) throw ConfigError("impulse.N must be >= 1");
    ImpulseOptions io;
    io.nu = positive(c, "impulse.nu");
    const ExperimentOptions opt = experiment_options(c, "impulse");
    const ImpulseResult r =
        impulse_decay(spec, static_cast<int>(N), c.real("impulse.v_i"), c.real("impulse.mu"), tol, io, opt);

    json j = ctx.summary();
    j["epsilon"] = r.epsilon;
    j["horizon"] = r.horizon;
    j["min_linf"] = r.min_linf;
    j["predicted_bound"] = r.predicted_bound;
    j["bound_holds"] = r.min_linf >= r.predicted_bound;
    j["window"] = r.window;
    j["reruns"] = r.reruns;
    j["max_edge_ratio"] = r.max_edge_ratio;
    j["boundary_contaminated"] = r.boundary_contaminated;
    j["dps_min_linf"] = r.dps_min_linf;
    j["dps_lower_bound"] = r.dps_lower_bound;
    write_json(ctx.out_dir / "summary.json", j);
    ctx.out << "min ||X||_inf " << fmt(r.min_linf) << " vs predicted bound " << fmt(r.predicted_bound) << "\n";
    return ExitCode::ok;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Newton's cradle chains, the discrete p-Schroedinger amplitude equation and its breathers"};
    app.require_subcommand(1);

    struct Pending {
        std::string key;
        std::string flag;
        std::string value;
        std::string command;
        CLI::Option* option = nullptr;
    };
    std::deque<Pending> pending;  // options bind to the stored strings, so no reallocation
    std::map<std::string, std::string> config_path;

    std::map<std::string, CLI::App*> subs;
    for (const auto& [name, help] : command_help()) {
        CLI::App* sub = app.add_subcommand(name, help);
        subs[name] = sub;
        sub->add_option("--config", config_path[name], "INI file with [section] key = value entries");
        for (const auto& f : flag_table()) {
            const bool applies = f.commands.empty() ||
                                 std::find(f.commands.begin(), f.commands.end(), name) != f.commands.end();
            if (!applies) continue;
            pending.push_back({f.key, f.flag, {}, name, nullptr});
            auto& slot = pending.back();
            const auto def = std::find_if(known_keys().begin(), known_keys().end(),
                                          [&](const KeyDef& k) { return k.key == f.key; });
            slot.option = sub->add_option(f.flag, slot.value, def->help + " [" + f.key + "]");
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return e.get_exit_code() == 0 ? ExitCode::ok : ExitCode::usage_error;
    }

    std::string command;
    for (const auto& [name, sub] : subs)
        if (sub->parsed()) command = name;

    Config config;
    try {
        if (!config_path[command].empty()) config.load_file(config_path[command]);
        for (const auto& p : pending)
            if (p.command == command && p.option->count() > 0) config.set_flag(p.key, p.flag, p.value);
        (void)config.to_json();  // type-checks every key up front
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return ExitCode::usage_error;
    }

    fs::path out_dir = config.text("run.out");
    try {
        fs::create_directories(out_dir);
        const Context ctx{command, config, out_dir, out};
        if (command == "omega0") return cmd_omega0(ctx);
        if (command == "simulate-lattice") return cmd_simulate_lattice(ctx);
        if (command == "simulate-dps") return cmd_simulate_dps(ctx);
        if (command == "breather") return cmd_breather(ctx);
        if (command == "scaling") return cmd_scaling(ctx);
        if (command == "persistence") return cmd_persistence(ctx);
        if (command == "impulse") return cmd_impulse(ctx);
        err << "error: unknown command\n";
        return ExitCode::usage_error;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return ExitCode::usage_error;
    } catch (const NumericalError& e) {
        json d;
        d["command"] = command;
        d["error"] = to_string(e.kind());
        d["time"] = e.time();
        d["message"] = e.what();
        d["config"] = config.to_json();
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        if (!ec) {
            std::ofstream f(out_dir / "diagnostics.json");
            f << to_text(d) << '\n';
        }
        err << to_text(d) << "\n";
        return ExitCode::numerical_failure;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return ExitCode::usage_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return ExitCode::numerical_failure;
    }
}

}  // namespace cradle::cli
