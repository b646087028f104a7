// fracfact: exact conditional tests for two-level fractional factorial
// designs with count or ratio-of-counts observations.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "fracfact/correspond.hpp"
#include "fracfact/design.hpp"
#include "fracfact/error.hpp"
#include "fracfact/fiber.hpp"
#include "fracfact/glm.hpp"
#include "fracfact/io.hpp"
#include "fracfact/model.hpp"
#include "fracfact/moves.hpp"
#include "fracfact/sampler.hpp"

using namespace fracfact;

namespace {

constexpr const char* kVersion = "fracfact 0.1.0";

long long env_budget(const char* name, long long fallback) {
    const char* v = std::getenv(name);
    if (!v || !*v)
        return fallback;
    return std::atoll(v);
}

FiberBudget fiber_budget_from_env() {
    FiberBudget b;
    b.max_points = static_cast<std::size_t>(env_budget("FRACFACT_MAX_POINTS", 2'000'000));
    b.max_nodes = static_cast<std::size_t>(env_budget("FRACFACT_MAX_NODES", 50'000'000));
    return b;
}

CompletionBudget completion_budget_from_env() {
    CompletionBudget b;
    b.max_vectors = static_cast<std::size_t>(env_budget("FRACFACT_MAX_VECTORS", 100'000));
    return b;
}

std::vector<MoveVec> kernel_moves(const IntMatrix& m) {
    std::vector<MoveVec> basis;
    for (const auto& z : kernel_basis(m)) {
        MoveVec v(z.size());
        for (size_t i = 0; i < z.size(); ++i)
            v[i] = to_long_checked(z[i]);
        basis.push_back(std::move(v));
    }
    return basis;
}

struct Bundle {
    DesignSpec spec;
    DesignMatrix dmat;
    std::vector<Word> subgroup;
    std::optional<ModelSpec> model;
    std::optional<CovariateMatrix> x0;

    static Bundle load(const std::string& design_path, const std::string& model_path,
                       bool closure) {
        auto spec = read_design_path(design_path);
        auto dmat = build_design_matrix(spec);
        auto subgroup = expand_defining_contrast(spec);
        Bundle b{std::move(spec), std::move(dmat), std::move(subgroup), std::nullopt,
                 std::nullopt};
        if (!model_path.empty()) {
            b.model = read_model_path(model_path, b.spec.p(), closure);
            b.x0 = build_covariate_matrix(b.dmat, *b.model);
        }
        return b;
    }
};

std::string design_summary(const DesignSpec& spec, const std::vector<Word>& subgroup) {
    std::ostringstream os;
    os << "2^{" << spec.p() << "-" << spec.q() << "} design, " << spec.runs() << " runs";
    auto res = resolution(subgroup);
    if (res)
        os << ", resolution " << roman_numeral(*res);
    else
        os << ", full factorial";
    return os.str();
}

void emit_manifest(const std::string& command, const std::map<std::string, std::string>& inputs,
                   const std::map<std::string, std::string>& config,
                   const std::map<std::string, std::string>& outputs,
                   const std::string& explicit_path) {
    RunManifest m;
    m.version = kVersion;
    m.command = command;
    for (const auto& [label, path] : inputs)
        m.input_digests[label + ":" + path] = file_digest(path);
    m.config = config;
    m.outputs = outputs;
    std::string path = explicit_path;
    if (path.empty() && !outputs.empty())
        path = outputs.begin()->second + ".manifest.json";
    if (!path.empty())
        write_manifest(m, path);
}

// ---------------------------------------------------------------- design --

int cmd_design(const std::string& design_path, int max_alias_len,
               const std::string& match_path, const std::string& format,
               const std::string& manifest_path) {
    auto spec = read_design_path(design_path);
    auto dmat = build_design_matrix(spec);
    auto subgroup = expand_defining_contrast(spec);
    auto res = resolution(subgroup);

    // Row-permutation report: match an externally printed design table
    // against our Yates ordering.
    std::optional<std::vector<int>> row_map;
    if (!match_path.empty()) {
        std::ifstream in(match_path);
        if (!in)
            throw ParseError("cannot open matrix file: " + match_path);
        auto external = read_matrix_4ti2(in);
        if (external.rows() != dmat.runs() || external.cols() != spec.p())
            throw ParseError("matrix to match must be " + std::to_string(dmat.runs()) + " x " +
                             std::to_string(spec.p()));
        row_map.emplace(dmat.runs(), -1);
        for (int i = 0; i < external.rows(); ++i) {
            for (int r = 0; r < dmat.runs(); ++r) {
                bool same = true;
                for (int f = 1; f <= spec.p() && same; ++f)
                    same = external.at(i, f - 1) == dmat.entry(r, f);
                if (same) {
                    (*row_map)[i] = r;
                    break;
                }
            }
            if ((*row_map)[i] < 0)
                throw ParseError("row " + std::to_string(i + 1) +
                                 " of the external table is not a run of this design");
        }
    }

    if (format == "json") {
        nlohmann::ordered_json j;
        j["design"] = design_summary(spec, subgroup);
        j["p"] = spec.p();
        j["q"] = spec.q();
        j["runs"] = spec.runs();
        j["resolution"] = res ? nlohmann::json(*res) : nlohmann::json(nullptr);
        std::vector<std::string> sg;
        for (Word w : subgroup)
            sg.push_back(w.label());
        j["defining_contrast_subgroup"] = sg;
        nlohmann::ordered_json rows = nlohmann::json::array();
        for (int r = 0; r < dmat.runs(); ++r) {
            std::vector<int> row(spec.p());
            for (int f = 1; f <= spec.p(); ++f)
                row[f - 1] = dmat.entry(r, f);
            rows.push_back(row);
        }
        j["design_matrix"] = rows;
        nlohmann::ordered_json alias_table;
        {
            std::set<std::uint32_t> shown;
            for (Word g : subgroup)
                shown.insert(g.mask());
            std::vector<Word> leaders;
            for (std::uint32_t m = 1; m < (1u << spec.p()); ++m)
                leaders.push_back(Word::from_mask(m));
            std::sort(leaders.begin(), leaders.end(), WordLess{});
            for (Word w : leaders) {
                if (shown.count(w.mask()))
                    continue;
                std::vector<std::string> members;
                for (Word a : aliases(w, subgroup)) {
                    shown.insert(a.mask());
                    if (a.length() <= max_alias_len)
                        members.push_back(a.label());
                }
                shown.insert(w.mask());
                alias_table[w.label()] = members;
            }
        }
        j["aliases"] = alias_table;
        if (row_map)
            j["row_permutation"] = *row_map;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << design_summary(spec, subgroup) << "\n\nDesign matrix (runs x factors";
        std::cout << ", Yates order over basic factors";
        std::cout << "):\n     ";
        for (int f = 1; f <= spec.p(); ++f)
            std::cout << "  " << factor_letter(f);
        std::cout << "\n";
        for (int r = 0; r < dmat.runs(); ++r) {
            std::cout << "run" << (r + 1 < 10 ? " " : "") << r + 1 << " ";
            for (int f = 1; f <= spec.p(); ++f)
                std::cout << (dmat.entry(r, f) > 0 ? " +1" : " -1");
            std::cout << "\n";
        }
        std::cout << "\nDefining contrast subgroup (" << subgroup.size() << " words):\n  I";
        for (Word w : subgroup)
            if (!w.is_identity())
                std::cout << " = " << w.label();
        std::cout << "\n\nAlias table (cosets led by their shortest word; members up to length "
                  << max_alias_len << "):\n";
        std::set<std::uint32_t> shown;
        for (Word g : subgroup)
            shown.insert(g.mask());
        std::vector<Word> leaders;
        for (std::uint32_t m = 1; m < (1u << spec.p()); ++m)
            leaders.push_back(Word::from_mask(m));
        std::sort(leaders.begin(), leaders.end(), WordLess{});
        for (Word w : leaders) {
            if (shown.count(w.mask()))
                continue;
            auto coset = aliases(w, subgroup);
            std::cout << "  " << w.label();
            for (Word a : coset) {
                shown.insert(a.mask());
                if (a.length() <= max_alias_len)
                    std::cout << " = " << a.label();
            }
            shown.insert(w.mask());
            std::cout << "\n";
        }
        if (res)
            std::cout << "\nResolution: " << roman_numeral(*res) << " (" << *res << ")\n";
        else
            std::cout << "\nResolution: unbounded (full factorial)\n";
        if (row_map) {
            std::cout << "\nRow permutation (external row -> our run):\n";
            for (size_t i = 0; i < row_map->size(); ++i)
                std::cout << "  " << i + 1 << " -> " << (*row_map)[i] + 1 << "\n";
        }
    }
    std::map<std::string, std::string> inputs = {{"design", design_path}};
    if (!match_path.empty())
        inputs["match"] = match_path;
    emit_manifest("design", inputs,
                  {{"max_alias_len", std::to_string(max_alias_len)}, {"format", format}}, {},
                  manifest_path);
    return 0;
}

// ----------------------------------------------------------------- model --

int cmd_model(const std::string& design_path, const std::string& model_path, bool closure,
              const std::string& export_path, const std::string& format,
              const std::string& manifest_path) {
    auto b = Bundle::load(design_path, model_path, closure);
    auto report = estimability_report(*b.model, b.subgroup, b.spec.runs());
    auto x0t = b.x0->x0_transposed();

    std::map<std::string, std::string> outputs;
    if (!export_path.empty()) {
        std::ofstream out(export_path);
        if (!out)
            throw Error("cannot write matrix file: " + export_path);
        write_matrix_4ti2(out, x0t);
        outputs["x0_transposed"] = export_path;
    }

    if (format == "json") {
        nlohmann::ordered_json j;
        j["design"] = design_summary(b.spec, b.subgroup);
        j["model"] = b.model->label();
        j["nu"] = b.x0->nu();
        j["runs"] = b.spec.runs();
        j["df"] = b.spec.runs() - b.x0->nu();
        j["estimable"] = report.estimable();
        j["saturated"] = report.saturated;
        nlohmann::ordered_json terms = nlohmann::json::array();
        for (const auto& t : report.terms) {
            nlohmann::ordered_json tj;
            tj["term"] = t.term.label();
            std::vector<std::string> al;
            for (Word a : t.alias_coset)
                al.push_back(a.label());
            tj["aliases"] = al;
            tj["aliased_to_identity"] = t.aliased_to_identity;
            if (t.collides_with)
                tj["collides_with"] = t.collides_with->label();
            terms.push_back(tj);
        }
        j["terms"] = terms;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << design_summary(b.spec, b.subgroup) << "\n";
        std::cout << "model: " << b.model->label() << "  (nu = " << b.x0->nu()
                  << ", df = " << b.spec.runs() - b.x0->nu() << ")\n\n";
        std::cout << "Estimability report:\n";
        for (const auto& t : report.terms) {
            std::cout << "  " << t.term.label();
            if (t.aliased_to_identity)
                std::cout << "  ** aliased to I **";
            if (t.collides_with)
                std::cout << "  ** collides with " << t.collides_with->label() << " **";
            if (!t.alias_coset.empty()) {
                std::cout << "  aliases:";
                for (Word a : t.alias_coset)
                    std::cout << " " << a.label();
            }
            std::cout << "\n";
        }
        if (report.saturated)
            std::cout << "  saturated: not testable\n";
        if (report.over_saturated)
            std::cout << "  more parameters than runs\n";
        std::cout << (report.estimable() ? "  all terms estimable\n"
                                         : "  model is NOT estimable\n");
        if (!export_path.empty())
            std::cout << "\nwrote X0' (" << x0t.rows() << " x " << x0t.cols() << ") to "
                      << export_path << "\n";
    }
    emit_manifest("model", {{"design", design_path}, {"model", model_path}},
                  {{"closure", closure ? "true" : "false"}, {"format", format}}, outputs,
                  manifest_path);
    return report.estimable() ? 0 : 2;
}

// ----------------------------------------------------------------- basis --

int cmd_basis(const std::string& design_path, const std::string& model_path, bool closure,
              const std::string& family_name, bool compute, const std::string& import_path,
              const std::string& out_path, bool verify, long long verify_total,
              const std::string& manifest_path) {
    auto b = Bundle::load(design_path, model_path, closure);
    const bool binomial = family_name == "binomial";
    IntMatrix x0t = b.x0->x0_transposed();
    if (binomial)
        x0t = lawrence_lift(x0t);

    MoveSet ms;
    if (compute) {
        ms = graver_completion(kernel_moves(x0t), x0t, completion_budget_from_env());
        std::cout << "computed Graver basis: " << ms.size() << " moves\n";
    } else {
        ms = import_basis_file(import_path, x0t);
        std::cout << "imported basis: " << ms.size() << " moves (validated against X0'"
                  << (binomial ? " lifted" : "") << ")\n";
    }

    std::map<std::string, std::string> outputs;
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out)
            throw Error("cannot write basis file: " + out_path);
        write_basis(out, ms);
        outputs["basis"] = out_path;
        std::cout << "wrote " << out_path << "\n";
    }

    if (verify) {
        if (binomial)
            throw Error("connectivity certification works on the unlifted configuration");
        // exhaustively check every fiber reachable with totals <= verify_total
        auto budget = fiber_budget_from_env();
        std::map<std::vector<long long>, char> seen;
        std::vector<long long> y(x0t.cols(), 0);
        size_t fibers = 0, disconnected = 0;
        std::function<void(int, long long)> rec = [&](int pos, long long remaining) {
            if (pos == x0t.cols()) {
                std::vector<long long> t(x0t.rows(), 0);
                for (int r = 0; r < x0t.rows(); ++r)
                    for (int c = 0; c < x0t.cols(); ++c)
                        t[r] += to_long_checked(x0t.at(r, c)) * y[c];
                if (seen.emplace(t, 1).second) {
                    ++fibers;
                    auto rep = verify_connectivity(ms, x0t, t, std::nullopt, budget);
                    if (!rep.connected) {
                        ++disconnected;
                        if (disconnected == 1) {
                            std::cout << "DISCONNECTED fiber (size " << rep.fiber_size << ", "
                                      << rep.components << " components), witness pair:\n";
                            for (const auto& w : {rep.witness->first, rep.witness->second}) {
                                std::cout << " ";
                                for (long long v : w)
                                    std::cout << " " << v;
                                std::cout << "\n";
                            }
                        }
                    }
                }
                return;
            }
            for (long long v = 0; v <= remaining; ++v) {
                y[pos] = v;
                rec(pos + 1, remaining - v);
            }
            y[pos] = 0;
        };
        for (long long total = 0; total <= verify_total; ++total)
            rec(0, total);
        std::cout << "connectivity: checked " << fibers << " fibers with totals <= "
                  << verify_total << "; " << (disconnected ? "FAILED on " : "all connected (")
                  << (disconnected ? std::to_string(disconnected) + " fibers"
                                   : std::to_string(fibers) + ")")
                  << "\n";
        if (disconnected)
            return 2;
    }

    std::map<std::string, std::string> inputs = {{"design", design_path},
                                                 {"model", model_path}};
    if (!import_path.empty())
        inputs["basis"] = import_path;
    emit_manifest("basis", inputs,
                  {{"closure", closure ? "true" : "false"},
                   {"family", family_name},
                   {"mode", compute ? "compute" : "import"},
                   {"verify_total", std::to_string(verify_total)}},
                  outputs, manifest_path);
    return 0;
}

// ------------------------------------------------------------- enumerate --

int cmd_enumerate(const std::string& design_path, const std::string& model_path, bool closure,
                  const std::string& data_path, const std::string& family_name,
                  const std::string& statistic_name, const std::string& points_path,
                  const std::string& format, const std::string& manifest_path) {
    auto b = Bundle::load(design_path, model_path, closure);
    auto data = read_data_path(data_path);
    const bool binomial = family_name == "binomial";
    if (static_cast<int>(data.counts.size()) != b.spec.runs())
        throw ParseError("data file has " + std::to_string(data.counts.size()) +
                         " runs, design expects " + std::to_string(b.spec.runs()));
    if (binomial && !data.denominators)
        throw ParseError("binomial family requires \"successes denominator\" data lines");

    auto x0t = b.x0->x0_transposed();
    auto t = sufficient_statistic(*b.x0, data.counts);

    std::optional<std::span<const long long>> bounds;
    if (binomial)
        bounds = std::span<const long long>(*data.denominators);
    auto fiber = enumerate_fiber(x0t, t, bounds, fiber_budget_from_env());
    auto probs =
        exact_null_distribution(fiber, binomial ? Family::binomial : Family::poisson);

    FitResult fit =
        binomial ? fit_glm(*b.x0, data.counts, Family::binomial,
                           std::span<const long long>(*data.denominators))
                 : fit_glm(*b.x0, data.counts, Family::poisson);

    // fitted means on the count scale, fixed across the fiber
    std::vector<double> mu_counts(b.spec.runs());
    for (int i = 0; i < b.spec.runs(); ++i)
        mu_counts[i] = binomial ? (*data.denominators)[i] * fit.mu[i] : fit.mu[i];

    const bool pearson = statistic_name == "pearson";
    auto statistic = [&](std::span<const long long> y) {
        if (binomial) {
            std::span<const long long> n(*data.denominators);
            return pearson ? binomial_pearson_stat(y, n, fit.mu)
                           : binomial_deviance_stat(y, n, fit.mu);
        }
        return pearson ? poisson_pearson_stat(y, mu_counts)
                       : poisson_deviance_stat(y, mu_counts);
    };
    const double t_obs = statistic(data.counts);
    const double exact_p = exact_pvalue(fiber, probs, statistic, t_obs);
    const int df = fit.df;
    const double p_asym = df > 0 ? chisq_upper_tail(t_obs, df)
                                 : std::numeric_limits<double>::quiet_NaN();

    std::map<std::string, std::string> outputs;
    if (!points_path.empty()) {
        std::ofstream out(points_path);
        if (!out)
            throw Error("cannot write points file: " + points_path);
        for (int c = 0; c < x0t.cols(); ++c)
            out << (c ? "," : "") << "y" << c + 1;
        out << ",probability,statistic\n";
        for (size_t i = 0; i < fiber.size(); ++i) {
            for (size_t c = 0; c < fiber.points[i].size(); ++c)
                out << (c ? "," : "") << fiber.points[i][c];
            char buf[64];
            std::snprintf(buf, sizeof buf, ",%.17g,%.17g", probs[i],
                          statistic(fiber.points[i]));
            out << buf << "\n";
        }
        outputs["points"] = points_path;
    }

    if (format == "json") {
        nlohmann::ordered_json j;
        j["fiber_size"] = fiber.size();
        j["statistic"] = statistic_name;
        j["t_obs"] = t_obs;
        j["df"] = df;
        j["p_asymptotic"] = df > 0 ? nlohmann::json(p_asym) : nlohmann::json(nullptr);
        j["p_exact"] = exact_p;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << design_summary(b.spec, b.subgroup) << "\n"
                  << "model: " << b.model->label() << "  family: " << family_name << "\n"
                  << "fiber size = " << fiber.size() << "\n"
                  << "t_obs (" << statistic_name << ") = " << t_obs << "  df = " << df << "\n";
        if (df > 0)
            std::cout << "asymptotic p = " << p_asym << "\n";
        std::cout << "exact conditional p = " << exact_p << "\n";
        if (!points_path.empty())
            std::cout << "wrote fiber points to " << points_path << "\n";
    }
    emit_manifest("enumerate",
                  {{"design", design_path}, {"model", model_path}, {"data", data_path}},
                  {{"closure", closure ? "true" : "false"},
                   {"family", family_name},
                   {"statistic", statistic_name}},
                  outputs, manifest_path);
    return 0;
}

// ------------------------------------------------------------------ test --

int cmd_test(const std::string& design_path, const std::string& model_path, bool closure,
             const std::string& data_path, const std::string& family_name,
             const std::string& basis_path, bool compute_basis, long long burn_in,
             long long samples, std::uint64_t seed, int batches, int chains,
             const std::string& statistic_name, const std::string& histogram_path,
             const std::string& format, const std::string& manifest_path) {
    auto b = Bundle::load(design_path, model_path, closure);
    auto data = read_data_path(data_path);
    const bool binomial = family_name == "binomial";
    if (static_cast<int>(data.counts.size()) != b.spec.runs())
        throw ParseError("data file has " + std::to_string(data.counts.size()) +
                         " runs, design expects " + std::to_string(b.spec.runs()));
    if (binomial && !data.denominators)
        throw ParseError("binomial family requires \"successes denominator\" data lines");

    IntMatrix x0t = b.x0->x0_transposed();
    if (binomial)
        x0t = lawrence_lift(x0t);

    // fit the null model; fitted means are fiber-constant
    FitResult fit =
        binomial ? fit_glm(*b.x0, data.counts, Family::binomial,
                           std::span<const long long>(*data.denominators))
                 : fit_glm(*b.x0, data.counts, Family::poisson);

    // working vector and fitted counts (lifted for binomial data)
    const int k = b.spec.runs();
    std::vector<long long> y0;
    std::vector<double> mu_counts;
    long long total = 0;
    if (binomial) {
        y0.resize(2 * k);
        mu_counts.resize(2 * k);
        for (int i = 0; i < k; ++i) {
            y0[i] = data.counts[i];
            y0[k + i] = (*data.denominators)[i] - data.counts[i];
            mu_counts[i] = (*data.denominators)[i] * fit.mu[i];
            mu_counts[k + i] = (*data.denominators)[i] * (1.0 - fit.mu[i]);
            total += (*data.denominators)[i];
        }
    } else {
        y0 = data.counts;
        mu_counts = fit.mu;
        for (long long v : y0)
            total += v;
    }

    MoveSet ms;
    if (compute_basis)
        ms = graver_completion(kernel_moves(x0t), x0t, completion_budget_from_env());
    else
        ms = import_basis_file(basis_path, x0t);

    Statistic statistic = statistic_name == "pearson"
                              ? make_pearson_statistic(mu_counts)
                              : make_deviance_statistic(mu_counts, total);

    ChainConfig cfg;
    cfg.seed = seed;
    cfg.burn_in = burn_in;
    cfg.samples = samples;
    cfg.batches = batches;

    TestResult result;
    if (chains <= 1) {
        result = run_chain(y0, ms, x0t, statistic, cfg, fit.df);
    } else {
        // independent seeded streams, pooled batch means
        std::vector<TestResult> parts(chains);
        std::vector<std::thread> workers;
        for (int c = 0; c < chains; ++c)
            workers.emplace_back([&, c] {
                ChainConfig local = cfg;
                local.stream = static_cast<unsigned>(c);
                parts[c] = run_chain(y0, ms, x0t, statistic, local, fit.df);
            });
        for (auto& w : workers)
            w.join();
        result = pool_chains(parts, cfg.histogram_bins);
    }

    std::map<std::string, std::string> outputs;
    if (!histogram_path.empty()) {
        std::ofstream out(histogram_path);
        if (!out)
            throw Error("cannot write histogram file: " + histogram_path);
        out << "bin_lo,bin_mid,bin_hi,count,density,chisq_pdf_df" << fit.df << "\n";
        const auto& h = result.histogram;
        const double width = (h.hi - h.lo) / h.counts.size();
        for (size_t bin = 0; bin < h.counts.size(); ++bin) {
            const double lo = h.lo + bin * width;
            const double mid = lo + width / 2, hi = lo + width;
            const double density =
                width > 0 ? h.counts[bin] / (width * result.samples) : 0.0;
            char buf[160];
            std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%lld,%.10g,%.10g\n", lo, mid, hi,
                          static_cast<long long>(h.counts[bin]), density,
                          fit.df > 0 ? chisq_pdf(mid, fit.df) : 0.0);
            out << buf;
        }
        outputs["histogram"] = histogram_path;
    }

    if (format == "json") {
        nlohmann::ordered_json j;
        j["design"] = design_summary(b.spec, b.subgroup);
        j["model"] = b.model->label();
        j["family"] = family_name;
        j["statistic"] = statistic_name;
        j["moves"] = ms.size();
        j["basis_provenance"] = compute_basis ? "computed" : "imported";
        j["t_obs"] = result.t_obs;
        j["df"] = result.df;
        j["p_asymptotic"] = result.df > 0 ? nlohmann::json(result.p_asymptotic)
                                          : nlohmann::json(nullptr);
        j["burn_in"] = result.burn_in;
        j["samples"] = result.samples;
        j["seed"] = seed;
        j["batches"] = batches;
        j["chains"] = chains;
        j["p_mcmc"] = result.p_mcmc;
        j["se_batch"] = result.se_batch;
        j["frac_multistate_steps"] = result.frac_multistate;
        j["fitted_means"] = fit.mu;
        std::cout << j.dump(2) << "\n";
    } else if (format == "csv") {
        std::cout << "t_obs,df,p_asymptotic,p_mcmc,se_batch,samples,burn_in,seed,moves\n";
        char buf[256];
        std::snprintf(buf, sizeof buf, "%.10g,%d,%.10g,%.10g,%.10g,%lld,%lld,%llu,%zu\n",
                      result.t_obs, result.df, result.p_asymptotic, result.p_mcmc,
                      result.se_batch, result.samples, result.burn_in,
                      static_cast<unsigned long long>(seed), ms.size());
        std::cout << buf;
    } else {
        char buf[128];
        std::cout << design_summary(b.spec, b.subgroup) << "\n"
                  << "model: " << b.model->label() << "  (nu = " << b.x0->nu()
                  << ", df = " << result.df << ")\n"
                  << "family: " << family_name << "   statistic: " << statistic_name << "\n"
                  << "moves: " << ms.size() << " ("
                  << (compute_basis ? "computed Graver" : "imported") << ")\n";
        std::snprintf(buf, sizeof buf, "t_obs = %.4f\n", result.t_obs);
        std::cout << buf;
        if (result.df > 0) {
            std::snprintf(buf, sizeof buf, "asymptotic p (chi2_%d) = %.4g\n", result.df,
                          result.p_asymptotic);
            std::cout << buf;
        }
        std::cout << "chain: burn-in " << result.burn_in << ", samples " << result.samples
                  << ", seed " << seed << ", batches " << batches << ", chains " << chains
                  << "\n";
        std::snprintf(buf, sizeof buf, "p_mcmc = %.4g   (batch SE %.2g)\n", result.p_mcmc,
                      result.se_batch);
        std::cout << buf;
        std::snprintf(buf, sizeof buf, "multi-state step fraction = %.3f\n",
                      result.frac_multistate);
        std::cout << buf;
        if (!histogram_path.empty())
            std::cout << "wrote histogram to " << histogram_path << "\n";
    }

    std::map<std::string, std::string> inputs = {
        {"design", design_path}, {"model", model_path}, {"data", data_path}};
    if (!compute_basis)
        inputs["basis"] = basis_path;
    emit_manifest("test", inputs,
                  {{"closure", closure ? "true" : "false"},
                   {"family", family_name},
                   {"statistic", statistic_name},
                   {"burn_in", std::to_string(burn_in)},
                   {"samples", std::to_string(samples)},
                   {"seed", std::to_string(seed)},
                   {"batches", std::to_string(batches)},
                   {"chains", std::to_string(chains)},
                   {"basis", compute_basis ? "computed" : basis_path}},
                  outputs, manifest_path);
    return 0;
}

// ------------------------------------------------------------ correspond --

int cmd_correspond(const std::string& design_path, const std::string& model_path, bool closure,
                   const std::string& format, const std::string& manifest_path) {
    auto b = Bundle::load(design_path, model_path, closure);
    const int m = b.spec.p() - b.spec.q();
    auto x0t = b.x0->x0_transposed();
    auto res = correspondence_report(x0t, m);

    std::string verdict;
    std::optional<MoveSet> primitive;
    if (res.kind == CorrespondenceResult::Kind::none) {
        verdict = "no hierarchical correspondent";
    } else {
        verdict = res.model->label();
        if (is_decomposable(*res.model))
            primitive = primitive_moves_for_decomposable(*res.model);
    }

    if (format == "json") {
        nlohmann::ordered_json j;
        j["design"] = design_summary(b.spec, b.subgroup);
        j["model"] = b.model->label();
        j["table_axes"] = m;
        j["correspondent"] =
            res.kind == CorrespondenceResult::Kind::none ? nlohmann::json(nullptr)
                                                         : nlohmann::json(verdict);
        j["kind"] = res.kind == CorrespondenceResult::Kind::none ? "none"
                    : res.kind == CorrespondenceResult::Kind::hierarchical
                        ? "hierarchical"
                        : "hierarchical_plus_parity";
        j["decomposable"] = primitive.has_value();
        if (primitive) {
            std::ostringstream os;
            write_basis(os, *primitive);
            j["primitive_moves"] = os.str();
        }
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << design_summary(b.spec, b.subgroup) << "\n"
                  << "model: " << b.model->label() << "\n"
                  << "corresponding 2^" << m << " table model: " << verdict << "\n";
        if (primitive) {
            std::cout << "decomposable: minimal Markov basis of primitive moves\n";
            write_basis(std::cout, *primitive);
        } else if (res.kind != CorrespondenceResult::Kind::none) {
            std::cout << "not a decomposable graphical model\n";
        }
    }
    emit_manifest("correspond", {{"design", design_path}, {"model", model_path}},
                  {{"closure", closure ? "true" : "false"}}, {}, manifest_path);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact conditional tests for two-level fractional factorial designs"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::string design_path, model_path, data_path, basis_path, out_path, export_path;
    std::string histogram_path, points_path, manifest_path;
    std::string family = "poisson", format = "text", statistic = "deviance";
    bool no_closure = false, compute = false, compute_basis = false, verify = false;
    int max_alias_len = 4, batches = 100, chains = 1;
    long long burn_in = 100'000, samples = 1'000'000, verify_total = 4;
    std::uint64_t seed = 1;

    auto add_common = [&](CLI::App* cmd, bool with_model) {
        cmd->add_option("--design", design_path, "design file (\"p q\" then q generators)")
            ->required();
        if (with_model) {
            cmd->add_option("--model", model_path, "model file (slash-separated words)")
                ->required();
            cmd->add_flag("--no-closure", no_closure, "skip hierarchical closure");
        }
        cmd->add_option("--manifest", manifest_path, "write a run manifest to this path");
        cmd->add_option("--format", format, "text|json|csv")->default_val("text");
    };

    auto* design_cmd = app.add_subcommand("design", "design matrix, aliasing and resolution");
    design_cmd->add_option("file", design_path, "design file")->required();
    design_cmd->add_option("--max-alias-len", max_alias_len, "alias display cutoff")
        ->default_val(4);
    std::string match_path;
    design_cmd->add_option("--match-matrix", match_path,
                           "report the row permutation onto an external design table");
    design_cmd->add_option("--manifest", manifest_path, "write a run manifest");
    design_cmd->add_option("--format", format, "text|json")->default_val("text");

    auto* model_cmd = app.add_subcommand("model", "covariate matrix and estimability");
    add_common(model_cmd, true);
    model_cmd->add_option("--export", export_path, "write X0' as a 4ti2-style matrix file");

    auto* basis_cmd = app.add_subcommand("basis", "compute or import a move basis");
    add_common(basis_cmd, true);
    basis_cmd->add_option("--family", family, "poisson|binomial")->default_val("poisson");
    basis_cmd->add_flag("--compute", compute, "compute the Graver basis");
    basis_cmd->add_option("--import", basis_path, "import a 4ti2-style basis file");
    basis_cmd->add_option("--out", out_path, "write the basis to this file");
    basis_cmd->add_flag("--verify-connectivity", verify,
                        "exhaustively certify small fibers");
    basis_cmd->add_option("--total", verify_total, "largest total for certification")
        ->default_val(4);

    auto* enum_cmd = app.add_subcommand("enumerate", "exact fiber enumeration and p-value");
    add_common(enum_cmd, true);
    enum_cmd->add_option("--data", data_path, "data file")->required();
    enum_cmd->add_option("--family", family, "poisson|binomial")->default_val("poisson");
    enum_cmd->add_option("--statistic", statistic, "deviance|pearson")->default_val("deviance");
    enum_cmd->add_option("--points", points_path, "write all fiber points as CSV");

    auto* test_cmd = app.add_subcommand("test", "Markov chain Monte Carlo conditional test");
    add_common(test_cmd, true);
    test_cmd->add_option("--data", data_path, "data file")->required();
    test_cmd->add_option("--family", family, "poisson|binomial")->default_val("poisson");
    test_cmd->add_option("--basis", basis_path, "imported 4ti2-style basis file");
    test_cmd->add_flag("--compute-basis", compute_basis, "use the computed Graver basis");
    test_cmd->add_option("--burn-in", burn_in, "burn-in steps")->default_val(100000);
    test_cmd->add_option("--samples", samples, "recorded steps")->default_val(1000000);
    test_cmd->add_option("--seed", seed, "RNG seed")->default_val(1);
    test_cmd->add_option("--batches", batches, "batch count for the SE")->default_val(100);
    test_cmd->add_option("--chains", chains, "independent chains to pool")->default_val(1);
    test_cmd->add_option("--statistic", statistic, "deviance|pearson")->default_val("deviance");
    test_cmd->add_option("--histogram", histogram_path, "write the statistic histogram CSV");

    auto* corr_cmd = app.add_subcommand("correspond", "contingency-table correspondence");
    add_common(corr_cmd, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(design_cmd))
            return cmd_design(design_path, max_alias_len, match_path, format, manifest_path);
        if (app.got_subcommand(model_cmd))
            return cmd_model(design_path, model_path, !no_closure, export_path, format,
                             manifest_path);
        if (app.got_subcommand(basis_cmd)) {
            if (compute == !basis_path.empty())
                throw ParseError("choose exactly one of --compute or --import");
            return cmd_basis(design_path, model_path, !no_closure, family, compute, basis_path,
                             out_path, verify, verify_total, manifest_path);
        }
        if (app.got_subcommand(enum_cmd))
            return cmd_enumerate(design_path, model_path, !no_closure, data_path, family,
                                 statistic, points_path, format, manifest_path);
        if (app.got_subcommand(test_cmd)) {
            if (compute_basis == !basis_path.empty())
                throw ParseError("choose exactly one of --basis or --compute-basis");
            return cmd_test(design_path, model_path, !no_closure, data_path, family, basis_path,
                            compute_basis, burn_in, samples, seed, batches, chains, statistic,
                            histogram_path, format, manifest_path);
        }
        if (app.got_subcommand(corr_cmd))
            return cmd_correspond(design_path, model_path, !no_closure, format, manifest_path);
    } catch (const BudgetError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
