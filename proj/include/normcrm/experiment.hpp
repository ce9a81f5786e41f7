#ifndef NORMCRM_EXPERIMENT_HPP_
#define NORMCRM_EXPERIMENT_HPP_

#include <Eigen/Dense>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "normcrm/dataset.hpp"
#include "normcrm/diagnostics.hpp"
#include "normcrm/eppf.hpp"
#include "normcrm/gibbs.hpp"
#include "normcrm/models.hpp"

namespace normcrm {

namespace detail {

inline std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::vector<std::string> split_on(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace detail

/// Plain-text key = value experiment configuration. Unknown keys are
/// rejected at validation so typos surface before any work happens.
class RunConfig {
public:
    static RunConfig from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("config: cannot open " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        return from_string(ss.str());
    }

    static RunConfig from_string(const std::string& text) {
        RunConfig cfg;
        std::istringstream in(text);
        std::string line;
        long line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            const std::string trimmed = dataset_trim(line);
            if (trimmed.empty()) continue;
            const auto eq = trimmed.find('=');
            if (eq == std::string::npos) {
                throw std::runtime_error("config: line " + std::to_string(line_no) +
                                         " is not key = value");
            }
            cfg.set(dataset_trim(trimmed.substr(0, eq)),
                    dataset_trim(trimmed.substr(eq + 1)));
        }
        return cfg;
    }

    void set(const std::string& key, const std::string& value) { kv_[key] = value; }
    bool has(const std::string& key) const { return kv_.count(key) > 0; }

    std::string get(const std::string& key, const std::string& fallback = "") const {
        auto it = kv_.find(key);
        return it == kv_.end() ? fallback : it->second;
    }

    double get_real(const std::string& key, double fallback) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        return parse_real(key, it->second);
    }

    long get_int(const std::string& key, long fallback) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        return std::stol(it->second);
    }

    std::vector<double> get_reals(const std::string& key) const {
        std::vector<double> out;
        for (const auto& tok : detail::split_on(get(key), ',')) {
            const std::string t = dataset_trim(tok);
            if (!t.empty()) out.push_back(parse_real(key, t));
        }
        return out;
    }

    std::vector<std::string> get_strings(const std::string& key) const {
        std::vector<std::string> out;
        for (const auto& tok : detail::split_on(get(key), ',')) {
            const std::string t = dataset_trim(tok);
            if (!t.empty()) out.push_back(t);
        }
        return out;
    }

    std::string echo() const {
        std::string out;
        for (const auto& [k, v] : kv_) out += k + " = " + v + "\n";
        return out;
    }

    void validate_keys() const {
        static const char* known[] = {
            "intensity", "omega", "sigma", "kappa", "calibrate_pair_tie",
            "calibrate_ekn", "calibrate_n", "calibrate_reps", "epsilon", "data",
            "seed_data", "response", "covariates", "model", "kappa0", "a", "b", "m0",
            "b0", "sigma0_diag", "nu0", "eta0sq", "variance_mode", "burnin",
            "samples", "thinning", "seed", "grid_min", "grid_max", "grid_points",
            "predict_at", "out", "binder", "coclustering"};
        std::vector<std::string> bad;
        for (const auto& [k, _] : kv_) {
            bool ok = false;
            for (const char* name : known) ok = ok || k == name;
            if (!ok) bad.push_back(k);
        }
        if (!bad.empty()) {
            std::string msg = "config: unknown keys:";
            for (const auto& k : bad) msg += " " + k;
            throw std::runtime_error(msg);
        }
    }

private:
    static std::string dataset_trim(const std::string& s) { return detail::trim(s); }

    static double parse_real(const std::string& key, const std::string& s) {
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (end == s.c_str() || *end != '\0') {
            throw std::runtime_error("config: non-numeric value for " + key + ": " + s);
        }
        return v;
    }

    std::map<std::string, std::string> kv_;
};

inline Dataset load_config_dataset(const RunConfig& cfg) {
    const std::string data = cfg.get("data");
    if (data.empty()) throw std::runtime_error("config: 'data' is required");
    if (data == "simulate:5gauss") {
        return simulate_reference_data(cfg.get_int("seed_data", 4242));
    }
    return ingest_csv(data, cfg.get("response", "y"), cfg.get_strings("covariates"));
}

inline Intensity make_intensity(const RunConfig& cfg) {
    const std::string kind = cfg.get("intensity", "gamma");
    if (kind == "gamma") return Intensity::gamma_process(cfg.get_real("omega", 1.0));
    if (kind == "gengamma") {
        return Intensity::generalized_gamma(cfg.get_real("sigma", 0.0),
                                            cfg.get_real("omega", 1.0));
    }
    if (kind == "bessel") return Intensity::bessel(cfg.get_real("omega", 1.0));
    throw std::runtime_error("config: unknown intensity '" + kind + "'");
}

/// kappa straight from the config, or calibrated against a pair-tie or prior
/// E(K_n) target. The resolved value is written back so reruns skip the
/// calibration.
inline double resolve_kappa(RunConfig& cfg, const Intensity& in) {
    if (cfg.has("kappa")) return cfg.get_real("kappa", 1.0);
    const double eps = cfg.get_real("epsilon", 1e-6);
    CalibrationOptions opts;
    opts.reps = static_cast<int>(cfg.get_int("calibrate_reps", 20000));
    CalibrationResult res{};
    if (cfg.has("calibrate_pair_tie")) {
        res = calibrate_kappa(in, eps,
                              CalibrationTarget::pair_tie(cfg.get_real("calibrate_pair_tie", 0.5)),
                              opts);
    } else if (cfg.has("calibrate_ekn")) {
        res = calibrate_kappa(
            in, eps,
            CalibrationTarget::expected_kn(cfg.get_real("calibrate_ekn", 5.0),
                                           static_cast<int>(cfg.get_int("calibrate_n", 0))),
            opts);
    } else {
        throw std::runtime_error("config: provide kappa or a calibrate_* target");
    }
    cfg.set("kappa", detail::format_real(res.kappa));
    return res.kappa;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

inline std::string fit_report_text(const FitReport& rep) {
    std::string s;
    s += "sse = " + detail::format_real(rep.sse) + "\n";
    s += "ssae = " + detail::format_real(rep.ssae) + "\n";
    s += "lpml = " + detail::format_real(rep.lpml) + "\n";
    s += "waic1 = " + detail::format_real(rep.waic1) + "\n";
    s += "waic2 = " + detail::format_real(rep.waic2) + "\n";
    int mode = 1;
    for (std::size_t k = 0; k < rep.kn_posterior.size(); ++k) {
        if (rep.kn_posterior[k] > rep.kn_posterior[mode - 1]) mode = static_cast<int>(k) + 1;
    }
    s += "kn_mode = " + std::to_string(mode) + "\n";
    s += "kn_posterior =";
    for (double p : rep.kn_posterior) s += " " + detail::format_real(p);
    s += "\ncpo =";
    for (double c : rep.cpo) s += " " + detail::format_real(c);
    s += "\nbinder =";
    for (int c : rep.binder) s += " " + std::to_string(c);
    s += "\n";
    return s;
}

inline void write_kn_csv(const std::filesystem::path& path,
                         const std::vector<double>& probs,
                         const std::vector<double>* se = nullptr) {
    std::string s = se ? "k,prob,se\n" : "k,prob\n";
    for (std::size_t k = 0; k < probs.size(); ++k) {
        s += std::to_string(k + 1) + "," + detail::format_real(probs[k]);
        if (se) s += "," + detail::format_real((*se)[k]);
        s += "\n";
    }
    write_text(path, s);
}

inline void write_density_csv(const std::filesystem::path& path, const DensityGrid& g) {
    std::string s = "y,mean,q05,q95\n";
    for (std::size_t i = 0; i < g.grid.size(); ++i) {
        s += detail::format_real(g.grid[i]) + "," + detail::format_real(g.mean[i]) +
             "," + detail::format_real(g.lo05[i]) + "," +
             detail::format_real(g.hi95[i]) + "\n";
    }
    write_text(path, s);
}

inline void write_coclustering_csv(const std::filesystem::path& path,
                                   const std::vector<double>& pi, int n) {
    std::string s;
    s.reserve(pi.size() * 8);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (j) s += ",";
            s += detail::format_real(pi[static_cast<std::size_t>(i) * n + j]);
        }
        s += "\n";
    }
    write_text(path, s);
}

namespace detail {

inline std::vector<double> default_grid(const Dataset& ds, const RunConfig& cfg) {
    double lo = ds.y[0], hi = ds.y[0];
    for (double v : ds.y) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double pad = 0.1 * (hi - lo + 1e-12);
    lo = cfg.get_real("grid_min", lo - pad);
    hi = cfg.get_real("grid_max", hi + pad);
    const long points = cfg.get_int("grid_points", 512);
    std::vector<double> grid(points);
    for (long i = 0; i < points; ++i) grid[i] = lo + (hi - lo) * i / (points - 1.0);
    return grid;
}

template <typename Model>
void write_run_outputs(const std::filesystem::path& dir, const ChainArchive& archive,
                       const Dataset& ds, const Model& model, const RunConfig& cfg) {
    const bool with_binder = cfg.get("binder", "on") != "off";
    const auto rep = predictive_indexes(archive, ds, model, with_binder);
    write_text(dir / "fit_report.txt", fit_report_text(rep));
    write_kn_csv(dir / "kn_posterior.csv", rep.kn_posterior);
    if (cfg.get("coclustering", "on") != "off") {
        write_coclustering_csv(dir / "coclustering.csv", coclustering_matrix(archive),
                               archive.n_data);
    }

    const auto grid = default_grid(ds, cfg);
    const std::string predict_at = cfg.get("predict_at");
    if (predict_at.empty()) {
        // regression models without explicit covariate points get the grid at
        // the covariate means
        std::vector<double> x(ds.p(), 0.0);
        for (const auto& row : ds.x) {
            for (int j = 0; j < ds.p(); ++j) x[j] += row[j] / ds.n();
        }
        write_density_csv(dir / "density_grid.csv",
                          predictive_density_grid(archive, model, grid, x));
    } else {
        int idx = 0;
        for (const auto& vec : split_on(predict_at, ';')) {
            std::vector<double> x;
            for (const auto& tok : split_on(vec, ',')) {
                const std::string t = trim(tok);
                if (!t.empty()) x.push_back(std::strtod(t.c_str(), nullptr));
            }
            write_density_csv(dir / ("density_grid_x" + std::to_string(idx) + ".csv"),
                              predictive_density_grid(archive, model, grid, x));
            ++idx;
        }
    }
}

}  // namespace detail

inline GaussNigModel make_gauss_model(const RunConfig& cfg, const Dataset& ds) {
    const double m0 = cfg.has("m0") ? cfg.get_real("m0", 0.0) : ds.mean_y();
    return GaussNigModel(cfg.get_real("kappa0", 0.01), cfg.get_real("a", 2.0),
                         cfg.get_real("b", 1.0), m0);
}

inline LinDepModel make_lindep_model(const RunConfig& cfg, const Dataset& ds) {
    const int d = ds.p() + 1;
    auto b0v = cfg.get_reals("b0");
    if (b0v.empty()) b0v.assign(d, 0.0);
    auto s0v = cfg.get_reals("sigma0_diag");
    if (s0v.empty()) s0v.assign(d, 100.0);
    if (static_cast<int>(b0v.size()) != d || static_cast<int>(s0v.size()) != d) {
        throw std::runtime_error("config: b0/sigma0_diag must have p+1 entries");
    }
    Eigen::VectorXd b0(d);
    Eigen::MatrixXd s0 = Eigen::MatrixXd::Zero(d, d);
    for (int j = 0; j < d; ++j) {
        b0[j] = b0v[j];
        s0(j, j) = s0v[j];
    }
    const VarianceMode mode = cfg.get("variance_mode", "in_locations") == "parametric"
                                  ? VarianceMode::Parametric
                                  : VarianceMode::InLocations;
    return LinDepModel(b0, s0, cfg.get_real("nu0", 4.0), cfg.get_real("eta0sq", 1.0),
                       mode);
}

inline bool is_lindep(const RunConfig& cfg, const Dataset& ds) {
    const std::string m = cfg.get("model");
    if (m == "lindep") return true;
    if (m == "gauss") return false;
    return ds.p() > 0;
}

/// Runs the full experiment described by the config: data, (possibly
/// calibrated) prior, Gibbs chain, archive and diagnostics files. Everything
/// is deterministic given the config plus seed, and the fully resolved config
/// is echoed next to the outputs.
inline void run_experiment(RunConfig cfg, const std::string& out_dir) {
    namespace fs = std::filesystem;
    cfg.validate_keys();
    const Dataset ds = load_config_dataset(cfg);
    if (ds.n() == 0) throw std::runtime_error("run: dataset is empty");
    const Intensity in = make_intensity(cfg);
    const double kappa = resolve_kappa(cfg, in);
    const double epsilon = cfg.get_real("epsilon", 1e-6);
    TruncationSpec trunc(epsilon, kappa);

    ChainConfig chain;
    chain.n_burnin = static_cast<int>(cfg.get_int("burnin", 5000));
    chain.n_samples = static_cast<int>(cfg.get_int("samples", 5000));
    chain.thinning = static_cast<int>(cfg.get_int("thinning", 10));
    chain.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));

    // the echo records every default the run actually used
    cfg.set("epsilon", detail::format_real(epsilon));
    cfg.set("burnin", std::to_string(chain.n_burnin));
    cfg.set("samples", std::to_string(chain.n_samples));
    cfg.set("thinning", std::to_string(chain.thinning));
    cfg.set("seed", std::to_string(chain.seed));
    if (!cfg.has("m0") && !is_lindep(cfg, ds)) {
        cfg.set("m0", detail::format_real(ds.mean_y()));
    }
    cfg.set("model", is_lindep(cfg, ds) ? "lindep" : "gauss");

    fs::create_directories(out_dir);
    write_text(fs::path(out_dir) / "config_resolved.txt", cfg.echo());

    if (is_lindep(cfg, ds)) {
        const auto model = make_lindep_model(cfg, ds);
        BlockedGibbs<LinDepModel> gibbs(in, trunc, model, ds);
        const auto archive = gibbs.run(chain);
        archive.save(out_dir);
        detail::write_run_outputs(out_dir, archive, ds, model, cfg);
    } else {
        const auto model = make_gauss_model(cfg, ds);
        BlockedGibbs<GaussNigModel> gibbs(in, trunc, model, ds);
        const auto archive = gibbs.run(chain);
        archive.save(out_dir);
        detail::write_run_outputs(out_dir, archive, ds, model, cfg);
    }
}

/// Recomputes every diagnostic from a saved archive; byte-identical to the
/// originating run's outputs.
inline void diagnose_archive(const std::string& archive_dir, const std::string& out_dir) {
    namespace fs = std::filesystem;
    RunConfig cfg = RunConfig::from_file(
        (fs::path(archive_dir) / "config_resolved.txt").string());
    const Dataset ds = load_config_dataset(cfg);
    const auto archive = ChainArchive::load(archive_dir);
    fs::create_directories(out_dir);
    if (is_lindep(cfg, ds)) {
        detail::write_run_outputs(out_dir, archive, ds, make_lindep_model(cfg, ds), cfg);
    } else {
        detail::write_run_outputs(out_dir, archive, ds, make_gauss_model(cfg, ds), cfg);
    }
}

/// Prior simulation report: Monte Carlo K_n law (plus the exact law when
/// n <= 12) and the first two moments of P_eps over half-lines of a standard
/// normal base measure.
inline std::string prior_simulate_report(const Intensity& in, const TruncationSpec& trunc,
                                         int n, int reps, std::uint64_t seed,
                                         const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    Rng rng(seed);
    const auto kn = prior_kn_monte_carlo(in, trunc, n, reps, rng);
    write_kn_csv(fs::path(out_dir) / "kn_prior.csv", kn.prob, &kn.se);

    const double b1 = 0.5, b2 = 0.841344746068543, b12 = 0.5;  // Phi(0), Phi(1)
    const auto th = prior_moments(in, trunc, b1, b2, b12);
    auto base = [](Rng& r) { return Location{draw_normal(0.0, 1.0, r)}; };
    double s1 = 0.0, s2 = 0.0, s1sq = 0.0, sprod = 0.0;
    const int mreps = std::min(reps, 100000);
    for (int r = 0; r < mreps; ++r) {
        const auto real = sample_prior_realization(in, trunc, base, rng);
        double w1 = 0.0, w2 = 0.0;
        for (std::size_t j = 0; j < real.atoms(); ++j) {
            if (real.locations[j][0] <= 0.0) w1 += real.weights[j];
            if (real.locations[j][0] <= 1.0) w2 += real.weights[j];
        }
        s1 += w1;
        s2 += w2;
        s1sq += w1 * w1;
        sprod += w1 * w2;
    }
    const double mc_mean1 = s1 / mreps;
    const double mc_mean2 = s2 / mreps;
    const double mc_var = s1sq / mreps - mc_mean1 * mc_mean1;
    const double mc_cov = sprod / mreps - mc_mean1 * mc_mean2;
    std::string text;
    text += "kn_mean = " + detail::format_real(kn.mean()) + "\n";
    text += "kn_sd = " + detail::format_real(kn.sd()) + "\n";
    text += "tie2 = " + detail::format_real(pair_tie_prob(in, trunc)) + "\n";
    text += "mean_B1_theory = " + detail::format_real(th.mean1) + "\n";
    text += "mean_B1_mc = " + detail::format_real(mc_mean1) + "\n";
    text += "var_B1_theory = " + detail::format_real(th.var1) + "\n";
    text += "var_B1_mc = " + detail::format_real(mc_var) + "\n";
    text += "cov_B1B2_theory = " + detail::format_real(th.cov) + "\n";
    text += "cov_B1B2_mc = " + detail::format_real(mc_cov) + "\n";
    write_text(fs::path(out_dir) / "prior_moments.txt", text);
    return text;
}

/// eppf diagnostics: partition-normalization residuals per n and, for the
/// gamma / bessel families, the distance to the Dirichlet-process eppf.
inline std::string eppf_check_report(const Intensity& in, const TruncationSpec& trunc,
                                     int nmax) {
    std::string text;
    for (int n = 2; n <= nmax; ++n) {
        const double s = eppf_partition_sum(in, trunc, n);
        text += "normalization_residual_n" + std::to_string(n) + " = " +
                detail::format_real(s - 1.0) + "\n";
    }
    if (in.family() == IntensityFamily::Gamma) {
        for (int n = 2; n <= nmax; ++n) {
            double worst = 0.0;
            for_each_partition(n, [&](const std::vector<int>& counts) {
                const double pe = eppf_truncated(in, trunc, Composition(counts));
                const double pd = eppf_dirichlet(Composition(counts), trunc.kappa);
                worst = std::max(worst, std::abs(pe - pd));
            });
            text += "dirichlet_gap_n" + std::to_string(n) + " = " +
                    detail::format_real(worst) + "\n";
        }
    }
    if (in.family() == IntensityFamily::Bessel) {
        for (int n = 2; n <= nmax; ++n) {
            double worst = 0.0;
            for_each_partition(n, [&](const std::vector<int>& counts) {
                const Composition comp(counts);
                const double pb = eppf_bessel(comp, in.omega(), trunc.kappa);
                const double pd = eppf_dirichlet(comp, trunc.kappa);
                worst = std::max(worst, std::abs(pb - pd) / pd);
            });
            text += "bessel_dirichlet_relgap_n" + std::to_string(n) + " = " +
                    detail::format_real(worst) + "\n";
        }
    }
    return text;
}

}  // namespace normcrm

#endif  // NORMCRM_EXPERIMENT_HPP_
