#include <fstream>
#include <set>
#include <sstream>

#include "nonsimple/app.hpp"
#include "nonsimple/errors.hpp"

namespace nonsimple {

using nlohmann::json;

namespace {

const std::array<const char*, 4> kEdgeNames{"left", "right", "bottom", "top"};

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

// Strict object reader: every key must be consumed.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object())
            throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    double number(const std::string& key, double fallback) {
        if (!has(key))
            return fallback;
        const json& v = raw(key);
        if (!v.is_number())
            throw ConfigError(join(path_, key), "expected a number");
        return v.get<double>();
    }

    long long integer(const std::string& key, long long fallback) {
        if (!has(key))
            return fallback;
        const json& v = raw(key);
        if (!v.is_number_integer() && !v.is_number_unsigned())
            throw ConfigError(join(path_, key), "expected an integer");
        return v.get<long long>();
    }

    bool boolean(const std::string& key, bool fallback) {
        if (!has(key))
            return fallback;
        const json& v = raw(key);
        if (!v.is_boolean())
            throw ConfigError(join(path_, key), "expected true or false");
        return v.get<bool>();
    }

    std::string string(const std::string& key, const std::string& fallback) {
        if (!has(key))
            return fallback;
        const json& v = raw(key);
        if (!v.is_string())
            throw ConfigError(join(path_, key), "expected a string");
        return v.get<std::string>();
    }

    std::string child(const std::string& key) const { return join(path_, key); }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key()))
                throw ConfigError(join(path_, it.key()), "unknown field");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

std::vector<double> number_array(const json& v, std::size_t n, const std::string& path) {
    std::vector<double> out;
    auto flatten = [&](const json& a, auto&& self) -> void {
        if (a.is_number()) {
            out.push_back(a.get<double>());
            return;
        }
        if (!a.is_array())
            throw ConfigError(path, "expected numbers");
        for (const json& e : a)
            self(e, self);
    };
    flatten(v, flatten);
    if (out.size() != n)
        throw ConfigError(path, "expected " + std::to_string(n) + " numbers, got " +
                                    std::to_string(out.size()));
    return out;
}

NodalSource nodal_source(const json& v, std::size_t n, const std::string& path) {
    NodalSource src;
    if (v.is_object()) {
        ObjectReader r(v, path);
        src.file = r.string("file", "");
        if (src.file.empty())
            throw ConfigError(path + ".file", "expected a file path");
        r.finish();
        return src;
    }
    src.constant = number_array(v, n, path);
    return src;
}

json nodal_source_json(const NodalSource& s, bool matrix) {
    if (!s.file.empty())
        return {{"file", s.file}};
    if (!matrix)
        return s.constant;
    return json::array({{s.constant[0], s.constant[1]},
                        {s.constant[2], s.constant[3]},
                        {s.constant[4], s.constant[5]}});
}

std::array<std::optional<Vec3>, 4> edge_vectors(const json& v, const std::string& path) {
    std::array<std::optional<Vec3>, 4> out;
    ObjectReader r(v, path);
    for (int k = 0; k < 4; ++k) {
        if (!r.has(kEdgeNames[k]))
            continue;
        const auto a = number_array(r.raw(kEdgeNames[k]), 3, r.child(kEdgeNames[k]));
        out[k] = Vec3(a[0], a[1], a[2]);
    }
    r.finish();
    return out;
}

json edge_vectors_json(const std::array<std::optional<Vec3>, 4>& e) {
    json out = json::object();
    for (int k = 0; k < 4; ++k)
        if (e[k])
            out[kEdgeNames[k]] = {(*e[k])(0), (*e[k])(1), (*e[k])(2)};
    return out;
}

std::vector<std::vector<double>> read_table(const std::filesystem::path& path, std::size_t rows,
                                            std::size_t cols, const std::string& field) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError(field, "cannot open '" + path.string() + "'");
    std::vector<std::vector<double>> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        for (char& c : line)
            if (c == ',')
                c = ' ';
        std::istringstream ls(line);
        std::vector<double> row;
        double v;
        while (ls >> v)
            row.push_back(v);
        if (row.empty())
            continue;
        if (row.size() != cols)
            throw ConfigError(field, "expected " + std::to_string(cols) + " columns in '" +
                                         path.string() + "'");
        out.push_back(std::move(row));
    }
    if (out.size() != rows)
        throw ConfigError(field, "expected " + std::to_string(rows) + " rows in '" +
                                     path.string() + "', got " + std::to_string(out.size()));
    return out;
}

} // namespace

RunConfig RunConfig::from_json(const json& j, std::filesystem::path base) {
    RunConfig c;
    c.base_dir = std::move(base);
    ObjectReader root(j, "");

    if (root.has("domain")) {
        ObjectReader r(root.raw("domain"), "domain");
        c.domain.Lx = r.number("Lx", c.domain.Lx);
        c.domain.Ly = r.number("Ly", c.domain.Ly);
        c.domain.nx = static_cast<int>(r.integer("nx", c.domain.nx));
        c.domain.ny = static_cast<int>(r.integer("ny", c.domain.ny));
        r.finish();
    }
    c.domain.validate();

    if (root.has("material")) {
        ObjectReader r(root.raw("material"), "material");
        MaterialParams& m = c.material;
        m.alpha = r.number("alpha", m.alpha);
        m.beta = r.number("beta", m.beta);
        m.c_b = r.number("c_b", m.c_b);
        m.p = r.number("p", m.p);
        m.c_J = r.number("c_J", m.c_J);
        m.q = r.number("q", m.q);
        m.split_mode = r.boolean("split_mode", m.split_mode);
        m.c_K = r.number("c_K", m.c_K);
        m.c_Gamma = r.number("c_Gamma", m.c_Gamma);
        r.finish();
    }
    c.material.validate();

    if (root.has("boundary")) {
        ObjectReader r(root.raw("boundary"), "boundary");
        for (int k = 0; k < 4; ++k) {
            const std::string tag = r.string(kEdgeNames[k], to_string(c.edges[k]));
            try {
                c.edges[k] = edge_tag_from_string(tag);
            } catch (const std::invalid_argument&) {
                throw ConfigError(r.child(kEdgeNames[k]), "expected clamped, pinned or free");
            }
        }
        c.planar = r.boolean("planar", c.planar);
        if (r.has("f_o")) {
            ObjectReader f(r.raw("f_o"), "boundary.f_o");
            c.f_o_preset = f.string("preset", c.f_o_preset);
            if (c.f_o_preset == "stretch") {
                c.lambda_x = f.number("lambda_x", 1.0);
                c.lambda_y = f.number("lambda_y", 1.0);
                if (!(c.lambda_x > 0.0))
                    throw ConfigError("boundary.f_o.lambda_x", "must be positive");
                if (!(c.lambda_y > 0.0))
                    throw ConfigError("boundary.f_o.lambda_y", "must be positive");
            } else if (c.f_o_preset == "custom") {
                c.f_o_file = f.string("file", "");
                if (c.f_o_file.empty())
                    throw ConfigError("boundary.f_o.file", "required for the custom preset");
            } else if (c.f_o_preset != "identity") {
                throw ConfigError("boundary.f_o.preset", "expected identity, stretch or custom");
            }
            f.finish();
        }
        r.finish();
    }

    if (root.has("loads")) {
        ObjectReader r(root.raw("loads"), "loads");
        if (r.has("b"))
            c.b = nodal_source(r.raw("b"), 3, "loads.b");
        if (r.has("B"))
            c.B = nodal_source(r.raw("B"), 6, "loads.B");
        if (r.has("tau"))
            c.tau = edge_vectors(r.raw("tau"), "loads.tau");
        if (r.has("mu"))
            c.mu = edge_vectors(r.raw("mu"), "loads.mu");
        r.finish();
    }

    if (root.has("solver")) {
        ObjectReader r(root.raw("solver"), "solver");
        SolveConfig& s = c.solver;
        s.grad_tol = r.number("grad_tol", s.grad_tol);
        s.max_iters = static_cast<int>(r.integer("max_iters", s.max_iters));
        s.ls_shrink = r.number("ls_shrink", s.ls_shrink);
        s.ls_armijo = r.number("ls_armijo", s.ls_armijo);
        s.memory = static_cast<int>(r.integer("memory", s.memory));
        const long long seed = r.integer("seed", static_cast<long long>(s.seed));
        if (seed < 0)
            throw ConfigError("solver.seed", "must be nonnegative");
        s.seed = static_cast<std::uint64_t>(seed);
        s.perturbation_amplitude = r.number("perturbation_amplitude", s.perturbation_amplitude);
        r.finish();
    }
    c.solver.validate();

    if (root.has("outputs")) {
        ObjectReader r(root.raw("outputs"), "outputs");
        c.output_directory = r.string("directory", c.output_directory);
        if (r.has("formats")) {
            const json& f = r.raw("formats");
            if (!f.is_array())
                throw ConfigError("outputs.formats", "expected an array");
            c.formats.clear();
            for (const json& e : f) {
                if (!e.is_string())
                    throw ConfigError("outputs.formats", "expected strings");
                const auto s = e.get<std::string>();
                if (s != "vtk" && s != "csv" && s != "json")
                    throw ConfigError("outputs.formats", "unknown format '" + s + "'");
                c.formats.push_back(s);
            }
        }
        r.finish();
    }
    root.finish();
    return c;
}

json RunConfig::to_json() const {
    json j;
    j["domain"] = {{"Lx", domain.Lx}, {"Ly", domain.Ly}, {"nx", domain.nx}, {"ny", domain.ny}};
    j["material"] = {{"alpha", material.alpha},       {"beta", material.beta},
                     {"c_b", material.c_b},           {"p", material.p},
                     {"c_J", material.c_J},           {"q", material.q},
                     {"split_mode", material.split_mode}, {"c_K", material.c_K},
                     {"c_Gamma", material.c_Gamma}};
    json boundary;
    for (int k = 0; k < 4; ++k)
        boundary[kEdgeNames[k]] = to_string(edges[k]);
    boundary["planar"] = planar;
    if (f_o_preset == "stretch")
        boundary["f_o"] = {{"preset", "stretch"}, {"lambda_x", lambda_x}, {"lambda_y", lambda_y}};
    else if (f_o_preset == "custom")
        boundary["f_o"] = {{"preset", "custom"}, {"file", f_o_file}};
    else
        boundary["f_o"] = {{"preset", "identity"}};
    j["boundary"] = boundary;
    j["loads"] = {{"b", nodal_source_json(b, false)},
                  {"B", nodal_source_json(B, true)},
                  {"tau", edge_vectors_json(tau)},
                  {"mu", edge_vectors_json(mu)}};
    j["solver"] = {{"grad_tol", solver.grad_tol},
                   {"max_iters", solver.max_iters},
                   {"ls_shrink", solver.ls_shrink},
                   {"ls_armijo", solver.ls_armijo},
                   {"memory", solver.memory},
                   {"seed", solver.seed},
                   {"perturbation_amplitude", solver.perturbation_amplitude}};
    j["outputs"] = {{"directory", output_directory}, {"formats", formats}};
    return j;
}

Problem RunConfig::make_problem() const {
    const int N = domain.size();
    auto resolve = [&](const std::string& f) {
        const std::filesystem::path p(f);
        return p.is_absolute() ? p : base_dir / p;
    };

    BoundarySpec boundary;
    boundary.tags = edges;
    boundary.planar = planar;
    if (f_o_preset == "stretch") {
        boundary.f_o = stretch_field(domain, lambda_x, lambda_y);
    } else if (f_o_preset == "custom") {
        const auto rows = read_table(resolve(f_o_file), N, 3, "boundary.f_o.file");
        boundary.f_o.resize(N, 3);
        for (int n = 0; n < N; ++n)
            boundary.f_o.row(n) << rows[n][0], rows[n][1], rows[n][2];
    } else {
        boundary.f_o = identity_field(domain);
    }

    LoadSpec loads = LoadSpec::zero(N);
    if (!b.file.empty()) {
        const auto rows = read_table(resolve(b.file), N, 3, "loads.b.file");
        for (int n = 0; n < N; ++n)
            loads.b.row(n) << rows[n][0], rows[n][1], rows[n][2];
    } else {
        for (int n = 0; n < N; ++n)
            loads.b.row(n) << b.constant[0], b.constant[1], b.constant[2];
    }
    auto fill_B = [](Tensor32& t, const std::vector<double>& v) {
        t << v[0], v[1], v[2], v[3], v[4], v[5];
    };
    if (!B.file.empty()) {
        const auto rows = read_table(resolve(B.file), N, 6, "loads.B.file");
        for (int n = 0; n < N; ++n)
            fill_B(loads.B[n], rows[n]);
    } else {
        for (int n = 0; n < N; ++n)
            fill_B(loads.B[n], B.constant);
    }

    GridOperators ops(domain);
    for (int k = 0; k < 4; ++k) {
        const BoundaryEdge& e = ops.edges()[k];
        for (int n : e.nodes) {
            if (tau[k])
                loads.tau.row(n) = tau[k]->transpose();
            if (mu[k])
                loads.mu.row(n) = mu[k]->transpose();
        }
    }
    return Problem(domain, std::move(boundary), std::move(loads), material);
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("<file>", "cannot open '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
    }
}

RunConfig load_config(const std::filesystem::path& path) {
    return RunConfig::from_json(read_json_file(path), path.parent_path());
}

void set_json_path(json& doc, const std::string& path, double value) {
    json* cur = &doc;
    std::string walked;
    std::istringstream ss(path);
    std::string seg;
    std::vector<std::string> segs;
    while (std::getline(ss, seg, '.'))
        segs.push_back(seg);
    if (segs.empty())
        throw ConfigError(path, "empty parameter path");
    for (std::size_t k = 0; k < segs.size(); ++k) {
        const std::string& s = segs[k];
        walked = join(walked, s);
        const bool last = k + 1 == segs.size();
        if (cur->is_array()) {
            std::size_t idx = 0;
            try {
                idx = std::stoul(s);
            } catch (const std::exception&) {
                throw ConfigError(walked, "expected an array index");
            }
            if (idx >= cur->size())
                throw ConfigError(walked, "index out of range");
            cur = &(*cur)[idx];
        } else if (cur->is_object()) {
            if (!cur->contains(s))
                throw ConfigError(walked, "no such parameter");
            cur = &(*cur)[s];
        } else {
            throw ConfigError(walked, "not a container");
        }
        if (last) {
            if (!cur->is_number())
                throw ConfigError(walked, "sweep parameter must be numeric");
            if (cur->is_number_integer() || cur->is_number_unsigned())
                *cur = static_cast<long long>(value);
            else
                *cur = value;
        }
    }
}

} // namespace nonsimple
