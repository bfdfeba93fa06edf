#pragma once

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "boundary_data.hpp"
#include "bukhgeim.hpp"
#include "cauchy.hpp"
#include "io.hpp"
#include "lorentz.hpp"
#include "recon.hpp"
#include "stationary_phase.hpp"

namespace bklab::cli {

namespace fs = std::filesystem;

// Merged view of flags and an optional JSON config (--config). Config keys are the long flag names with
// '-' replaced by '_'; a flag given on the command line wins. Relative paths in a config resolve against
// the config file's directory.
class Options {
public:
    Options(CLI::App* app, std::vector<std::string> keys, std::vector<std::string> flags = {})
        : app_(app), keys_(std::move(keys)), flags_(std::move(flags))
    {
        app_->add_option("--config", config_path_, "JSON config with a top-level version field");
        for (const auto& k : keys_) app_->add_option("--" + k, values_[k]);
        for (const auto& k : flags_) app_->add_flag("--" + k, switches_[k]);
    }

    void load_config()
    {
        if (config_path_.empty())
            return;
        config_ = parse_json_text(read_text(config_path_), config_path_);
        if (!config_.is_object())
            throw ConfigError("config must be a JSON object");
        detail::check_version(config_, "config");
        std::set<std::string> ok{"version"};
        for (const auto& k : keys_) ok.insert(underscore(k));
        for (const auto& k : flags_) ok.insert(underscore(k));
        for (auto it = config_.begin(); it != config_.end(); ++it)
            if (!ok.count(it.key()))
                throw ConfigError("config: unknown key '" + it.key() + "'");
        base_ = fs::path(config_path_).parent_path();
    }

    bool has(const std::string& k) const { return from_flag(k) || config_.contains(underscore(k)); }

    double number(const std::string& k, std::optional<double> fallback = std::nullopt) const
    {
        if (from_flag(k))
            return parse_number(values_.at(k), k);
        if (config_.contains(underscore(k))) {
            const json& v = config_[underscore(k)];
            if (v.is_number())
                return v.get<double>();
            if (v.is_string())
                return parse_number(v.get<std::string>(), k);
            throw ConfigError("'" + k + "' must be a number");
        }
        if (!fallback)
            throw ConfigError("missing required option --" + k);
        return *fallback;
    }

    int integer(const std::string& k, std::optional<int> fallback = std::nullopt) const
    {
        const double v = number(k, fallback ? std::optional<double>(*fallback) : std::nullopt);
        if (v != std::floor(v))
            throw ConfigError("'" + k + "' must be an integer");
        return static_cast<int>(v);
    }

    std::string text(const std::string& k, std::optional<std::string> fallback = std::nullopt) const
    {
        if (from_flag(k))
            return values_.at(k);
        if (config_.contains(underscore(k))) {
            const json& v = config_[underscore(k)];
            if (!v.is_string())
                throw ConfigError("'" + k + "' must be a string");
            return v.get<std::string>();
        }
        if (!fallback)
            throw ConfigError("missing required option --" + k);
        return *fallback;
    }

    bool flag(const std::string& k) const
    {
        if (switches_.at(k))
            return true;
        if (config_.contains(underscore(k))) {
            if (!config_[underscore(k)].is_boolean())
                throw ConfigError("'" + k + "' must be a boolean");
            return config_[underscore(k)].get<bool>();
        }
        return false;
    }

    // "a,b,c", "lo:hi" (geometric, ratio 2) or a JSON array.
    std::vector<double> list(const std::string& k, std::optional<std::string> fallback = std::nullopt) const
    {
        if (!from_flag(k) && config_.contains(underscore(k)) && config_[underscore(k)].is_array()) {
            std::vector<double> out;
            for (const auto& v : config_[underscore(k)]) {
                if (!v.is_number())
                    throw ConfigError("'" + k + "' must hold numbers");
                out.push_back(v.get<double>());
            }
            return out;
        }
        if (!from_flag(k) && config_.contains(underscore(k)) && config_[underscore(k)].is_number())
            return {config_[underscore(k)].get<double>()};
        const std::string s = text(k, fallback);
        if (const auto c = s.find(':'); c != std::string::npos)
            return geometric_taus(parse_number(s.substr(0, c), k), parse_number(s.substr(c + 1), k));
        std::vector<double> out;
        std::size_t start = 0;
        while (start <= s.size()) {
            const std::size_t end = s.find(',', start);
            out.push_back(parse_number(s.substr(start, end == std::string::npos ? std::string::npos : end - start), k));
            if (end == std::string::npos)
                break;
            start = end + 1;
        }
        return out;
    }

    cplx point(const std::string& k, cplx fallback) const
    {
        if (!has(k))
            return fallback;
        if (!from_flag(k) && config_[underscore(k)].is_array())
            return detail::json_point(config_[underscore(k)], k);
        const auto v = list(k);
        if (v.size() != 2)
            throw ConfigError("'" + k + "' must be x,y");
        return {v[0], v[1]};
    }

    Domain domain(const std::string& k, const std::optional<Grid>& hint) const
    {
        if (!from_flag(k) && config_.contains(underscore(k)) && config_[underscore(k)].is_object())
            return domain_from_json(config_[underscore(k)], hint);
        return load_domain(path(k), hint);
    }

    Field potential(const std::string& k, const std::optional<Grid>& hint) const
    {
        if (!from_flag(k) && config_.contains(underscore(k)) && config_[underscore(k)].is_object())
            return potential_from_json(config_[underscore(k)], hint);
        return load_potential(path(k), hint);
    }

    // Grid of a domain given by file or inline object, if it names one.
    std::optional<Grid> domain_grid(const std::string& k) const
    {
        json j;
        if (!from_flag(k) && config_.contains(underscore(k)) && config_[underscore(k)].is_object())
            j = config_[underscore(k)];
        else
            j = parse_json_text(read_text(path(k)), path(k).string());
        if (j.is_object() && j.contains("grid"))
            return grid_from_json(j["grid"]);
        return std::nullopt;
    }

    fs::path path(const std::string& k) const
    {
        if (from_flag(k))
            return values_.at(k);
        const fs::path p = text(k);
        return p.is_absolute() || base_.empty() ? p : base_ / p;
    }

    fs::path out_dir() const { return has("out") ? path("out") : fs::path("."); }

private:
    static std::string underscore(std::string k)
    {
        for (auto& c : k)
            if (c == '-')
                c = '_';
        return k;
    }

    static double parse_number(const std::string& s, const std::string& k)
    {
        if (s == "inf")
            return kInf;
        try {
            std::size_t pos = 0;
            const double v = std::stod(s, &pos);
            if (pos != s.size())
                throw ConfigError("");
            return v;
        } catch (...) {
            throw ConfigError("'" + k + "': not a number: '" + s + "'");
        }
    }

    bool from_flag(const std::string& k) const { return values_.count(k) && app_->count("--" + k) > 0; }

    CLI::App* app_;
    std::vector<std::string> keys_, flags_;
    std::map<std::string, std::string> values_;
    std::map<std::string, bool> switches_;
    std::string config_path_;
    json config_ = json::object();
    fs::path base_;
};

inline void print_json(const json& j) { std::cout << j.dump(2) << '\n'; }

inline json cplx_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline json fit_json(const SlopeFit& f)
{
    return json{{"slope", f.sufficient ? json(f.slope) : json(nullptr)}, {"sufficient", f.sufficient}};
}

inline int run_lorentz_norm(const Options& o)
{
    const Field f = o.potential("field", o.has("domain") ? o.domain_grid("domain") : std::nullopt);
    const LorentzIndex idx{o.number("p"), o.number("q"), !o.flag("seminormed")};
    std::optional<Domain> dom;
    if (o.has("domain"))
        dom = o.domain("domain", f.grid());
    const Domain* mask = dom ? &*dom : nullptr;
    const double v = o.has("s") ? bessel_norm(f, o.number("s"), idx, mask) : lorentz_norm(f, idx, mask);
    std::printf("%.12g\n", v);
    return 0;
}

inline int run_cauchy_selftest(const Options& o)
{
    std::vector<int> ns;
    for (double n : o.list("n-list", "64,128,256")) ns.push_back(static_cast<int>(n));
    const auto rows = cauchy_selftest(ns);
    CsvTable t{{"n", "h", "inverse_error", "disk_error", "disk_bound"}, {}};
    std::vector<double> hs, inv, disk;
    bool within = true;
    for (const auto& r : rows) {
        t.add({std::to_string(r.n), fmt_num(r.h), fmt_num(r.inverse_error), fmt_num(r.disk_error), fmt_num(r.disk_bound)});
        hs.push_back(r.h);
        inv.push_back(r.inverse_error);
        disk.push_back(r.disk_error);
        within = within && r.disk_error <= r.disk_bound;
    }
    const SlopeFit fi = fit_loglog_slope(hs, inv, false);
    const fs::path out = o.out_dir();
    write_text(out / "cauchy_selftest.csv", t.str());
    write_text(out / "cauchy_selftest.svg",
               loglog_svg("Cauchy transform self-test", "h", "sup error",
                          {{"inverse_error", hs, inv, fi.sufficient ? std::optional(fi.slope) : std::nullopt}, {"disk_error", hs, disk, {}}}));
    print_json({{"inverse_order", fit_json(fi)}, {"disk_within_bound", within}});
    return 0;
}

inline int run_stationary_phase(const Options& o)
{
    const Field q = o.potential("field", std::nullopt);
    const double s = o.number("s", 1.0);
    const std::vector<double> taus = o.has("taus") ? o.list("taus") : geometric_taus(o.number("tau-min", 4.0), o.number("tau-max", 256.0));
    const auto rows = smoothing_sweep(q, s, taus);
    CsvTable t{{"tau", "error", "bound"}, {}};
    std::vector<double> x, err, bnd;
    for (const auto& r : rows) {
        t.add({fmt_num(r.tau), fmt_num(r.error), fmt_num(r.bound)});
        x.push_back(r.tau);
        err.push_back(r.error);
        bnd.push_back(r.bound);
    }
    const SlopeFit fit = fit_loglog_slope(x, err);
    const fs::path out = o.out_dir();
    write_text(out / "stationary_phase.csv", t.str());
    write_text(out / "stationary_phase.svg",
               loglog_svg("Stationary phase smoothing error", "tau", "L2 error",
                          {{"error", x, err, fit.sufficient ? std::optional(fit.slope) : std::nullopt}, {"bound", x, bnd, {}}}));
    print_json({{"s", s}, {"error_slope", fit_json(fit)}});
    return 0;
}

inline int run_carleman_sweep(const Options& o)
{
    const auto grid = o.domain_grid("domain");
    const std::string a_spec = o.text("a", "one");
    std::optional<Field> a;
    if (a_spec != "one")
        a = o.potential("a", grid);
    const Domain dom = o.domain("domain", a ? std::optional(a->grid()) : grid);
    if (!a)
        a = Field(dom.grid(), 1.0);
    const std::string mode_s = o.text("mode", "cauchy");
    if (mode_s != "cauchy" && mode_s != "fixed-point")
        throw ConfigError("mode must be cauchy or fixed-point");
    const CarlemanMode mode = mode_s == "cauchy" ? CarlemanMode::phased_cauchy : CarlemanMode::fixed_point;
    const cplx z0 = o.point("z0", 0.0);
    const SweepRecord rec = carleman_sweep(*a, dom, o.list("tau", "4:256"), mode, z0);
    // reference right-hand side with unit constant: tau^{-1}(1 + ln tau)(||dbar a||_(2,1) + sup |a|), over the domain
    const Field da = wirtinger(dom.restrict(*a), Wirtinger::delbar, DiffMethod::centered, &dom);
    double sup_a = 0.0;
    for (std::size_t i = 0; i < a->size(); ++i)
        if (dom.in_mask(i))
            sup_a = std::max(sup_a, std::abs((*a)[i]));
    const double scale = lorentz_norm(da, LorentzIndex{2.0, 1.0, true}, &dom) + sup_a;
    CsvTable t{{"tau", "norm_l2weak", "norm_sup", "bound"}, {}};
    std::vector<double> bound;
    for (std::size_t k = 0; k < rec.taus.size(); ++k) {
        const double tau = rec.taus[k];
        bound.push_back(scale * (1.0 + std::log(tau)) / tau);
        t.add({fmt_num(tau), fmt_num(rec.series[0].values[k]), fmt_num(rec.series[1].values[k]), fmt_num(bound.back())});
    }
    const fs::path out = o.out_dir();
    write_text(out / "carleman_sweep.csv", t.str());
    std::vector<PlotSeries> ps;
    for (const auto& s : rec.series) ps.push_back({s.name, rec.taus, s.values, s.fit.sufficient ? std::optional(s.fit.slope) : std::nullopt});
    ps.push_back({"bound", rec.taus, bound, {}});
    write_text(out / "carleman_sweep.svg", loglog_svg("Carleman sweep: " + rec.operand, "tau", "norm", ps));
    json slopes;
    for (const auto& s : rec.series) slopes[s.name] = fit_json(s.fit);
    print_json({{"operand", rec.operand}, {"z0", cplx_json(z0)}, {"slopes", slopes}, {"skipped_taus", rec.skipped}});
    return 0;
}

inline int run_bukhgeim(const Options& o)
{
    const Field q = o.potential("q", o.has("domain") ? o.domain_grid("domain") : std::nullopt);
    const Domain dom = o.domain("domain", q.grid());
    BukhgeimOptions opt;
    const std::string phase = o.text("phase", "holo");
    if (phase != "holo" && phase != "anti")
        throw ConfigError("phase must be holo or anti");
    opt.type = phase == "holo" ? PhaseType::holomorphic : PhaseType::antiholomorphic;
    opt.conjugate_phase = o.flag("conjugate");
    opt.tol = o.number("tol", opt.tol);
    opt.max_iter = o.integer("max-iter", opt.max_iter);
    const PhaseParams pp{o.number("tau"), o.point("z0", 0.0)};
    const BukhgeimSolution sol = solve_f(q, dom, pp, opt);
    const fs::path out = o.out_dir();
    write_field(sol.f, (out / "f.bkfld").string());
    write_field(assemble_u(sol, dom), (out / "u.bkfld").string());
    double sup_f = 0.0;
    for (std::size_t i = 0; i < sol.f.size(); ++i)
        if (dom.in_mask(i))
            sup_f = std::max(sup_f, std::abs(sol.f[i]));
    const json diag{{"tau", pp.tau},
                    {"z0", cplx_json(pp.z0)},
                    {"phase", phase},
                    {"conjugate_phase", opt.conjugate_phase},
                    {"iterations", sol.iterations},
                    {"converged", sol.converged},
                    {"final_update", sol.final_update},
                    {"contraction", sol.contraction},
                    {"fixed_point_defect", sol.fixed_point_defect},
                    {"sup_f", sup_f},
                    {"sup_f_within_4_3", sup_f <= 4.0 / 3.0 * (1.0 + 1e-6)},
                    {"updates", sol.updates},
                    {"pde_residual_direct", pde_residual(sol, q, dom, LaplacianForm::direct)},
                    {"pde_residual_factored", pde_residual(sol, q, dom, LaplacianForm::factored)}};
    write_text(out / "bukhgeim.json", diag.dump(2) + "\n");
    print_json(diag);
    if (!sol.converged)
        throw NumericalError("fixed-point iteration did not reach tol within max-iter");
    return 0;
}

inline int run_cauchy_distance(const Options& o)
{
    const auto grid = o.domain_grid("domain");
    const Field q1 = o.potential("q1", grid);
    const Field q2 = o.potential("q2", q1.grid());
    const Domain dom = o.domain("domain", q1.grid());
    const std::string zg = o.text("z0-grid", "3x3");
    const auto x = zg.find('x');
    if (x == std::string::npos || zg.substr(0, x) != zg.substr(x + 1))
        throw ConfigError("z0-grid must be MxM");
    int m = 0;
    try {
        m = std::stoi(zg.substr(0, x));
    } catch (...) {
        throw ConfigError("z0-grid must be MxM");
    }
    CauchyFamily fam;
    fam.bukhgeim = !o.flag("no-bukhgeim");
    if (fam.bukhgeim) {
        fam.z0s = z0_lattice(dom, o.point("z0-centre", domain_centre(dom)), o.number("z0-half", 0.3), m);
        fam.taus = o.list("taus", "8,16,32");
    }
    fam.trig_modes = o.integer("modes", 8);
    const CauchyDistanceReport r = cauchy_distance(q1, q2, dom, fam);
    CsvTable t{{"kind", "tau", "z0_re", "z0_im", "mode_u", "mode_v", "value"}, {}};
    json pairs = json::array();
    for (const auto& p : r.pairs)
        t.add({p.kind, fmt_num(p.tau), fmt_num(p.z0.real()), fmt_num(p.z0.imag()), std::to_string(p.mode_u), std::to_string(p.mode_v),
               fmt_num(p.value)});
    json skipped = json::array();
    for (const auto& [tau, z0] : r.skipped) skipped.push_back({{"tau", tau}, {"z0", cplx_json(z0)}});
    json z0s = json::array();
    for (cplx z : fam.z0s) z0s.push_back(cplx_json(z));
    const json rep{{"value", r.value},
                   {"lower_bound", true},
                   {"family", {{"description", r.family}, {"z0s", z0s}, {"taus", fam.taus}, {"trig_modes", fam.trig_modes}, {"bukhgeim", fam.bukhgeim}}},
                   {"pair_count", r.pairs.size()},
                   {"skipped", skipped}};
    const fs::path out = o.out_dir();
    write_text(out / "cauchy_distance.json", rep.dump(2) + "\n");
    write_text(out / "cauchy_distance_pairs.csv", t.str());
    for (int k = 0; k < fam.trig_modes; ++k)
        write_text(out / "traces" / ("mode_" + std::to_string(k) + ".csv"), trace_to_csv(dom.sample(trig_mode(dom, k)), dom).str());
    print_json(rep);
    return 0;
}

inline json recon_metrics(const ReconstructionResult& r)
{
    return json{{"form", form_name(r.form)}, {"tau", r.tau},        {"sup_error", r.sup_error},
                {"l2_error", r.l2_error},    {"weak_error", r.weak_error}, {"diverged", r.diverged}};
}

inline void add_lattice_rows(CsvTable& t, const ReconstructionResult& r)
{
    for (std::size_t i = 0; i < r.lattice.cells(); ++i) {
        const cplx z = r.lattice.center(i);
        t.add({fmt_num(r.tau), form_name(r.form), fmt_num(z.real()), fmt_num(z.imag()), r.valid[i] ? "1" : "0", fmt_num(r.q_rec[i].real()),
               fmt_num(r.q_rec[i].imag()), fmt_num(r.truth[i].real()), fmt_num(r.truth[i].imag())});
    }
}

inline int run_reconstruct(const Options& o)
{
    const Field q = o.potential("q", o.has("domain") ? o.domain_grid("domain") : std::nullopt);
    const Domain dom = o.has("domain") ? o.domain("domain", q.grid()) : Domain(q.grid(), Disk{0.0, 1.0});
    const std::string form = o.text("form", "both");
    if (form != "interior" && form != "boundary" && form != "both")
        throw ConfigError("form must be interior, boundary or both");
    const Grid lattice(o.number("lattice-half", 0.6), o.integer("lattice-n", 8));
    const std::vector<double> taus = o.list("tau");
    const fs::path out = o.out_dir();
    CsvTable sweep{{"tau", "form", "sup_error", "l2_error", "weak_error", "diverged"}, {}};
    CsvTable points{{"tau", "form", "z0_re", "z0_im", "valid", "re", "im", "truth_re", "truth_im"}, {}};
    json metrics = json::array();
    std::map<std::string, std::vector<double>> err;
    int diverged = 0;
    for (double tau : taus) {
        const auto rs = reconstruct(q, dom, tau, lattice, form != "boundary", form != "interior");
        double gap = 0.0;
        if (rs.size() == 2)
            for (std::size_t i = 0; i < lattice.cells(); ++i)
                if (rs[0].valid[i])
                    gap = std::max(gap, std::abs(rs[0].q_rec[i] - rs[1].q_rec[i]));
        for (const auto& r : rs) {
            const std::string suffix = taus.size() > 1 ? "_tau" + fmt_num(tau) : "";
            write_field(r.q_rec, (out / ("q_rec_" + std::string(form_name(r.form)) + suffix + ".bkfld")).string());
            sweep.add({fmt_num(tau), form_name(r.form), fmt_num(r.sup_error), fmt_num(r.l2_error), fmt_num(r.weak_error), std::to_string(r.diverged)});
            add_lattice_rows(points, r);
            json m = recon_metrics(r);
            if (rs.size() == 2) {
                m["form_gap"] = gap;
                m["gap_bound"] = kReconGapConstant * dom.grid().spacing() * tau;
            }
            metrics.push_back(m);
            err[form_name(r.form)].push_back(r.sup_error);
            diverged += r.diverged;
        }
    }
    write_text(out / "reconstruct.csv", sweep.str());
    write_text(out / "reconstruct_points.csv", points.str());
    if (taus.size() > 1) {
        std::vector<PlotSeries> ps;
        for (const auto& [name, e] : err) {
            const SlopeFit f = fit_loglog_slope(taus, e);
            ps.push_back({name, taus, e, f.sufficient ? std::optional(f.slope) : std::nullopt});
        }
        write_text(out / "reconstruct.svg", loglog_svg("Reconstruction error on the lattice", "tau", "sup error", ps));
    }
    const json rep{{"lattice", grid_to_json(lattice)}, {"results", metrics}};
    write_text(out / "reconstruct.json", rep.dump(2) + "\n");
    print_json(rep);
    if (diverged > 0)
        throw DivergenceError("fixed point diverged at " + std::to_string(diverged) + " lattice points (partial result written)");
    return 0;
}

inline int run_stability(const Options& o)
{
    const auto grid = o.domain_grid("domain");
    const Domain dom = o.domain("domain", grid);
    const Field q1 = o.potential("q1", dom.grid());
    const Field pert = o.potential("perturbation", dom.grid());
    const std::vector<double> eps = o.list("eps", "0.4,0.2,0.1,0.05,0.025,0.0125");
    StabilityConfig cfg;
    cfg.s = o.number("s", 0.25);
    const int m = o.integer("z0-m", 3);
    cfg.family.z0s = z0_lattice(dom, o.point("z0-centre", domain_centre(dom)), o.number("z0-half", 0.3), m);
    cfg.family.taus = o.list("taus", "4,8,16");
    cfg.family.trig_modes = o.integer("modes", 8);
    cfg.lattice = Grid(o.number("lattice-half", 0.6), o.integer("lattice-n", 8));
    cfg.tau_min = o.number("tau-min", 1.0);
    std::vector<PotentialPair> pairs;
    std::map<std::string, double> eps_of;
    for (double e : eps) {
        Field q2 = q1;
        Field p = pert;
        p *= e;
        q2 += p;
        char label[32];
        std::snprintf(label, sizeof label, "%.6g", e);
        if (!eps_of.emplace(label, e).second)
            throw ConfigError("duplicate eps value " + std::string(label));
        pairs.push_back({label, q1, std::move(q2)});
    }
    const StabilityRecord rec = stability_experiment(pairs, dom, cfg);
    CsvTable t{{"eps", "norm_diff", "dhat", "log_term", "tau_rule", "tau_used", "clamped", "recon_sup_error", "recon_l2_error"}, {}};
    std::vector<double> x, nd, dh;
    for (const auto& r : rec.rows) {
        t.add({fmt_num(eps_of.at(r.label)), fmt_num(r.norm_diff), fmt_num(r.dhat), fmt_num(r.log_term), fmt_num(r.tau_rule), fmt_num(r.tau_used),
               r.clamped ? "1" : "0", fmt_num(r.recon_sup_error), fmt_num(r.recon_l2_error)});
        x.push_back(eps_of.at(r.label));
        nd.push_back(r.norm_diff);
        dh.push_back(r.dhat);
    }
    const fs::path out = o.out_dir();
    write_text(out / "stability.csv", t.str());
    if (x.size() >= 2) {
        const SlopeFit fn = fit_loglog_slope(x, nd, false), fd = fit_loglog_slope(x, dh, false);
        write_text(out / "stability.svg",
                   loglog_svg("Stability experiment", "perturbation size", "value",
                              {{"norm_diff", x, nd, fn.sufficient ? std::optional(fn.slope) : std::nullopt},
                               {"dhat", x, dh, fd.sufficient ? std::optional(fd.slope) : std::nullopt}}));
    }
    const json rep{{"s", cfg.s},
                   {"growth_constant", rec.growth_constant},
                   {"B", rec.B},
                   {"spearman", std::isnan(rec.spearman) ? json(nullptr) : json(rec.spearman)},
                   {"max_ratio", rec.max_ratio},
                   {"rows", rec.rows.size()},
                   {"excluded", rec.excluded}};
    write_text(out / "stability.json", rep.dump(2) + "\n");
    print_json(rep);
    return 0;
}

inline void print_error(const std::string& type, const std::string& message, int code)
{
    std::cerr << json{{"error", {{"type", type}, {"message", message}}}, {"exit_code", code}}.dump() << '\n';
}

inline int cli_main(int argc, const char* const* argv)
{
    CLI::App app{"Numerical laboratory for oscillating solutions and stationary-phase recovery of planar potentials", "bklab"};
    app.require_subcommand(1);
    struct Entry {
        CLI::App* sub;
        std::unique_ptr<Options> opts;
        int (*run)(const Options&);
    };
    std::vector<Entry> entries;
    auto add = [&](const char* name, const char* help, std::vector<std::string> keys, std::vector<std::string> flags, int (*run)(const Options&)) {
        CLI::App* sub = app.add_subcommand(name, help);
        keys.push_back("out");
        entries.push_back({sub, std::make_unique<Options>(sub, std::move(keys), std::move(flags)), run});
    };
    add("lorentz-norm", "Lorentz or Bessel-Lorentz norm of a field", {"field", "p", "q", "s", "domain"}, {"seminormed"}, run_lorentz_norm);
    add("cauchy-selftest", "Right-inverse order and unit-disk closed form", {"n-list"}, {}, run_cauchy_selftest);
    add("stationary-phase", "Smoothing error sweep against the stationary-phase bound", {"field", "s", "tau-min", "tau-max", "taus"}, {},
        run_stationary_phase);
    add("carleman-sweep", "Decay of the phased Cauchy transform over tau", {"domain", "a", "mode", "tau", "z0"}, {}, run_carleman_sweep);
    add("bukhgeim", "Fixed-point oscillating solution", {"q", "domain", "tau", "z0", "phase", "tol", "max-iter"}, {"conjugate"}, run_bukhgeim);
    add("cauchy-distance", "Lower bound for the Cauchy-data distance", {"q1", "q2", "domain", "z0-grid", "z0-half", "z0-centre", "taus", "modes"},
        {"no-bukhgeim"}, run_cauchy_distance);
    add("reconstruct", "Stationary-phase reconstruction on a lattice", {"q", "domain", "tau", "form", "lattice-n", "lattice-half"}, {},
        run_reconstruct);
    add("stability", "Stability trend over shrinking perturbations",
        {"domain", "q1", "perturbation", "eps", "s", "z0-m", "z0-half", "z0-centre", "taus", "modes", "lattice-n", "lattice-half", "tau-min"}, {},
        run_stability);
    try {
        app.parse(argc, argv);
        for (auto& e : entries)
            if (e.sub->parsed()) {
                e.opts->load_config();
                const fs::path out = e.opts->out_dir();
                fs::create_directories(out);
                return e.run(*e.opts);
            }
        return 2;
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        print_error("ParseError", e.what(), 2);
        return 2;
    } catch (const ConfigError& e) {
        print_error("ConfigError", e.what(), 2);
        return 2;
    } catch (const DivergenceError& e) {
        print_error("DivergenceError", e.what(), 3);
        return 3;
    } catch (const NumericalError& e) {
        print_error("NumericalError", e.what(), 3);
        return 3;
    } catch (const fs::filesystem_error& e) {
        print_error("ConfigError", e.what(), 2);
        return 2;
    } catch (const std::exception& e) {
        print_error("NumericalError", e.what(), 3);
        return 3;
    }
}

} // namespace bklab::cli
