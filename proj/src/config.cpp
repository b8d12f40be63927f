#include "fsvm/config.hpp"

#include "fsvm/spline.hpp"

#include <algorithm>
#include <fstream>

namespace fsvm {

namespace {

[[noreturn]] void bad(const std::string& what)
{
    throw Error(ErrorKind::configuration, what);
}

const char* kind_name(BaseKernelSpec::Kind kind)
{
    switch (kind) {
    case BaseKernelSpec::Kind::linear: return "linear";
    case BaseKernelSpec::Kind::gaussian: return "gaussian";
    case BaseKernelSpec::Kind::polynomial: return "polynomial";
    }
    return "linear";
}

BaseKernelSpec::Kind base_kind_from_string(const std::string& name)
{
    if (name == "linear")
        return BaseKernelSpec::Kind::linear;
    if (name == "gaussian" || name == "rbf")
        return BaseKernelSpec::Kind::gaussian;
    if (name == "polynomial" || name == "poly")
        return BaseKernelSpec::Kind::polynomial;
    bad("unknown base kernel '" + name + "'");
}

template <class T>
std::vector<T> scalar_or_list(const Json& j)
{
    if (j.is_array())
        return j.get<std::vector<T>>();
    return {j.get<T>()};
}

std::vector<int> dimension_list(const Json& j)
{
    if (j.is_string())
        return parse_int_list(j.get<std::string>());
    if (j.is_object()) {
        const int from = j.at("from").get<int>();
        const int to = j.at("to").get<int>();
        const int step = j.value("step", 1);
        if (step < 1 || to < from)
            bad("dimension range needs from <= to and step >= 1");
        std::vector<int> out;
        for (int d = from; d <= to; d += step)
            out.push_back(d);
        return out;
    }
    return scalar_or_list<int>(j);
}

/// Expands one declared kernel family into one kernel per sigma or degree.
std::vector<FunctionalKernel> expand_kernels(const Json& j)
{
    std::vector<Transform> transforms;
    if (j.contains("transforms"))
        for (const auto& t : j.at("transforms"))
            transforms.push_back(transform_from_json(t));
    const auto kind = base_kind_from_string(j.at("kind").get<std::string>());
    std::vector<FunctionalKernel> out;
    auto push = [&](BaseKernelSpec base) {
        base.validate();
        out.push_back(FunctionalKernel{transforms, std::nullopt, base});
    };
    switch (kind) {
    case BaseKernelSpec::Kind::linear: push(BaseKernelSpec::linear()); break;
    case BaseKernelSpec::Kind::gaussian:
        if (!j.contains("sigma"))
            bad("gaussian kernel needs 'sigma'");
        for (double s : scalar_or_list<double>(j.at("sigma")))
            push(BaseKernelSpec::gaussian(s));
        break;
    case BaseKernelSpec::Kind::polynomial:
        if (!j.contains("degree"))
            bad("polynomial kernel needs 'degree'");
        for (int d : scalar_or_list<int>(j.at("degree")))
            push(BaseKernelSpec::polynomial(d));
        break;
    }
    return out;
}

std::vector<FunctionalKernel> expand_kernel_list(const Json& j)
{
    std::vector<FunctionalKernel> out;
    for (const auto& k : j) {
        auto more = expand_kernels(k);
        out.insert(out.end(), more.begin(), more.end());
    }
    if (out.empty())
        bad("kernel list is empty");
    return out;
}

std::optional<BasisSpec> projection_family_from_json(const Json& j)
{
    if (j.is_null())
        return std::nullopt;
    BasisSpec spec;
    if (j.is_string()) {
        const auto name = j.get<std::string>();
        if (name == "none")
            return std::nullopt;
        spec.family = basis_family_from_string(name);
    } else {
        spec.family = basis_family_from_string(j.at("family").get<std::string>());
        spec.spline_degree = j.value("spline_degree", SplineSpace::cubic);
    }
    return spec;
}

CandidateGrid grid_from_json(const Json& j)
{
    CandidateGrid grid;
    grid.projection = projection_family_from_json(j.value("projection", Json()));
    if (j.contains("penalty"))
        grid.penalty = penalty_from_json(j.at("penalty"));
    if (j.contains("schedule") && !j.at("schedule").is_null())
        grid.schedule = SplitSchedule{j.at("schedule").value("coefficient", 0.5),
                                      j.at("schedule").value("exponent", 1.0)};

    if (j.contains("entries")) {
        for (const auto& e : j.at("entries")) {
            DimensionEntry entry;
            entry.dimension = e.value("dimension", 0);
            entry.kernels = expand_kernel_list(e.at("kernels"));
            entry.c_values = scalar_or_list<double>(e.at("C"));
            grid.entries.push_back(std::move(entry));
        }
    } else {
        std::vector<int> dims{0};
        if (j.contains("dimensions"))
            dims = dimension_list(j.at("dimensions"));
        else if (grid.projection)
            bad("a projection family needs 'dimensions'");
        const auto kernels = expand_kernel_list(j.at("kernels"));
        const auto cs = scalar_or_list<double>(j.at("C"));
        for (int d : dims)
            grid.entries.push_back(DimensionEntry{d, kernels, cs});
    }
    if (grid.entries.empty())
        bad("candidate grid is empty");
    for (const auto& e : grid.entries) {
        if (e.dimension < 0 || (e.dimension > 0 && !grid.projection))
            bad("dimension " + std::to_string(e.dimension) + " is invalid for this projection setting");
        if (grid.projection && e.dimension == 0)
            bad("projection dimensions must be positive");
        if (e.c_values.empty())
            bad("C list is empty");
        for (double c : e.c_values)
            if (!(c > 0.0) || !std::isfinite(c))
                bad("C values must be positive and finite");
    }
    grid.penalty.validate();
    return grid;
}

SplitParams split_from_json(const Json& j, std::uint64_t default_seed)
{
    SplitParams s;
    s.train_size = j.value("train_size", std::size_t{0});
    s.train_fraction = j.value("train_fraction", 0.5);
    if (!(s.train_fraction > 0.0 && s.train_fraction < 1.0))
        bad("train_fraction must lie in (0, 1)");
    s.policy = split_policy_from_string(j.value("policy", std::string("first_l")));
    s.seed = j.value("seed", default_seed);
    return s;
}

DatasetDescriptor dataset_from_json(const Json& j, const std::filesystem::path& base_dir)
{
    DatasetDescriptor d;
    std::filesystem::path p = j.at("path").get<std::string>();
    d.path = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    d.format = dataset_format_from_string(j.value("format", std::string("csv_rows")));
    if (j.contains("labels"))
        d.label_map = j.at("labels").get<std::map<std::string, int>>();
    for (const auto& [k, v] : d.label_map)
        if (v != 1 && v != -1)
            bad("label '" + k + "' must map to -1 or +1");
    d.fat_threshold = j.value("fat_threshold", 20.0);
    if (j.contains("interval")) {
        const auto iv = j.at("interval").get<std::vector<double>>();
        if (iv.size() != 2 || !(iv[0] < iv[1]))
            bad("interval must be [a, b] with a < b");
        d.interval = std::pair{iv[0], iv[1]};
    }
    if (j.contains("abscissae"))
        d.abscissae = j.at("abscissae").get<std::vector<double>>();
    d.unlabeled = j.value("unlabeled", false);
    return d;
}

void for_each_transform(CandidateGrid& grid, const auto& fn)
{
    for (auto& e : grid.entries)
        for (auto& k : e.kernels)
            for (auto& t : k.transforms)
                fn(t);
}

} // namespace

Json to_json(const BaseKernelSpec& base)
{
    Json j;
    j["kind"] = kind_name(base.kind);
    if (base.kind == BaseKernelSpec::Kind::gaussian)
        j["sigma"] = base.sigma;
    if (base.kind == BaseKernelSpec::Kind::polynomial)
        j["degree"] = base.degree;
    return j;
}

Json to_json(const Transform& t)
{
    switch (t.kind) {
    case Transform::Kind::center: return {{"kind", "center"}};
    case Transform::Kind::normalize: return {{"kind", "normalize"}};
    case Transform::Kind::derivative:
        return {{"kind", "derivative"}, {"order", t.order}, {"spline_dimension", t.spline_dimension}};
    }
    return {};
}

Json to_json(const BasisSpec& basis)
{
    return {{"family", to_string(basis.family)},
            {"dimension", basis.dimension},
            {"spline_degree", basis.spline_degree}};
}

Json to_json(const FunctionalKernel& kernel)
{
    Json j;
    j["transforms"] = Json::array();
    for (const auto& t : kernel.transforms)
        j["transforms"].push_back(to_json(t));
    j["projection"] = kernel.projection ? to_json(*kernel.projection) : Json();
    j["base"] = to_json(kernel.base);
    return j;
}

Json to_json(const Penalty& penalty)
{
    Json steps = Json::array();
    for (const auto& [upper, value] : penalty.steps)
        steps.push_back({upper, value});
    return {{"kind", "table"}, {"steps", steps}, {"tail", penalty.tail}};
}

Json to_json(const SplitParams& split)
{
    Json j;
    if (split.train_size > 0)
        j["train_size"] = split.train_size;
    else
        j["train_fraction"] = split.train_fraction;
    j["policy"] = to_string(split.policy);
    j["seed"] = split.seed;
    return j;
}

Json to_json(const ProtocolSpec& protocol)
{
    Json j;
    j["kind"] = to_string(protocol.kind);
    switch (protocol.kind) {
    case ProtocolKind::leave_one_out: break;
    case ProtocolKind::k_fold: j["folds"] = protocol.folds; break;
    case ProtocolKind::fixed_split: j["train_size"] = protocol.train_size; break;
    case ProtocolKind::repeated_splits:
        j["count"] = protocol.count;
        j["train_size"] = protocol.train_size;
        j["seed"] = protocol.seed;
        break;
    }
    j["inner"] = to_json(protocol.inner);
    return j;
}

Json to_json(const Candidate& candidate)
{
    return {{"dimension", candidate.dimension},
            {"kernel", to_json(candidate.kernel)},
            {"describe", candidate.kernel.describe()},
            {"C", candidate.C},
            {"kernel_index", candidate.kernel_index}};
}

BaseKernelSpec base_kernel_from_json(const Json& j)
{
    try {
        BaseKernelSpec b;
        b.kind = base_kind_from_string(j.at("kind").get<std::string>());
        if (b.kind == BaseKernelSpec::Kind::gaussian)
            b.sigma = j.at("sigma").get<double>();
        if (b.kind == BaseKernelSpec::Kind::polynomial)
            b.degree = j.at("degree").get<int>();
        b.validate();
        return b;
    } catch (const Json::exception& e) {
        bad(std::string("base kernel: ") + e.what());
    }
}

Transform transform_from_json(const Json& j)
{
    try {
        const std::string kind = j.is_string() ? j.get<std::string>() : j.at("kind").get<std::string>();
        if (kind == "center")
            return Transform::centering();
        if (kind == "normalize")
            return Transform::normalization();
        if (kind != "derivative")
            bad("unknown transform '" + kind + "'");
        if (j.is_string())
            bad("derivative transform needs 'order' and 'spline_dimension'");
        const int order = j.at("order").get<int>();
        if (order != 1 && order != 2)
            bad("derivative transform order must be 1 or 2");
        const auto& dim = j.at("spline_dimension");
        if (dim.is_string()) {
            if (dim.get<std::string>() != "auto")
                bad("spline_dimension must be an integer or \"auto\"");
            return Transform::derivative(order, 0);
        }
        const int d = dim.get<int>();
        if (d < order + 4)
            bad("derivative transform needs spline dimension >= order + 4");
        return Transform::derivative(order, d);
    } catch (const Json::exception& e) {
        bad(std::string("transform: ") + e.what());
    }
}

BasisSpec basis_from_json(const Json& j)
{
    try {
        BasisSpec b;
        b.family = basis_family_from_string(j.at("family").get<std::string>());
        b.dimension = j.at("dimension").get<int>();
        b.spline_degree = j.value("spline_degree", SplineSpace::cubic);
        if (b.dimension < 1)
            bad("basis dimension must be positive");
        return b;
    } catch (const Json::exception& e) {
        bad(std::string("basis: ") + e.what());
    }
}

FunctionalKernel kernel_from_json(const Json& j)
{
    try {
        FunctionalKernel k;
        for (const auto& t : j.value("transforms", Json::array()))
            k.transforms.push_back(transform_from_json(t));
        if (j.contains("projection") && !j.at("projection").is_null())
            k.projection = basis_from_json(j.at("projection"));
        k.base = base_kernel_from_json(j.at("base"));
        k.validate();
        return k;
    } catch (const Json::exception& e) {
        bad(std::string("kernel: ") + e.what());
    }
}

Penalty penalty_from_json(const Json& j)
{
    try {
        Penalty p;
        const std::string kind = j.value("kind", std::string("step"));
        if (kind == "step")
            p = Penalty::step(j.value("threshold", 100), j.value("high", 1000.0));
        else if (kind == "constant")
            p = Penalty::constant(j.value("value", 0.0));
        else if (kind == "table") {
            for (const auto& s : j.at("steps"))
                p.steps.emplace_back(s.at(0).get<int>(), s.at(1).get<double>());
            p.tail = j.at("tail").get<double>();
        } else
            bad("unknown penalty kind '" + kind + "'");
        p.validate();
        return p;
    } catch (const Json::exception& e) {
        bad(std::string("penalty: ") + e.what());
    }
}

RunConfig parse_run_config(const Json& j, const std::filesystem::path& base_dir)
{
    try {
        RunConfig c;
        c.seed = j.value("seed", std::uint64_t{0});
        c.threads = j.value("threads", 1u);
        if (c.threads < 1)
            bad("threads must be at least 1");
        if (j.contains("dataset") && !j.at("dataset").is_null())
            c.dataset = dataset_from_json(j.at("dataset"), base_dir);
        if (!j.contains("grid"))
            bad("configuration needs a 'grid' section");
        c.grid = grid_from_json(j.at("grid"));
        c.split = split_from_json(j.value("split", Json::object()), c.seed);
        if (j.contains("spline_candidates"))
            c.spline_candidates = j.at("spline_candidates").get<std::vector<int>>();

        const Json p = j.value("protocol", Json::object());
        c.protocol.kind = protocol_kind_from_string(p.value("kind", std::string("leave_one_out")));
        c.protocol.folds = p.value("folds", std::size_t{10});
        c.protocol.count = p.value("count", std::size_t{1});
        c.protocol.train_size = p.value("train_size", std::size_t{0});
        c.protocol.seed = p.value("seed", c.seed);
        c.protocol.inner = c.split;

        const Json s = j.value("solver", Json::object());
        c.solver.tolerance = s.value("tolerance", c.solver.tolerance);
        c.solver.max_iterations = s.value("max_iterations", c.solver.max_iterations);
        if (!(c.solver.tolerance > 0.0) || c.solver.max_iterations < 1)
            bad("solver tolerance and max_iterations must be positive");

        for_each_transform(c.grid, [&](const Transform& t) {
            if (t.kind == Transform::Kind::derivative && t.spline_dimension == 0)
                c.has_auto_spline = true;
        });
        return c;
    } catch (const Json::exception& e) {
        bad(std::string("configuration: ") + e.what());
    }
}

RunConfig load_run_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        bad("cannot open configuration '" + path.string() + "'");
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::exception& e) {
        bad("configuration '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return parse_run_config(j, path.parent_path());
}

void resolve_auto_spline(RunConfig& config, const LabeledDataset& data)
{
    if (!config.has_auto_spline)
        return;
    const int chosen = select_spline_dimension(data, config.spline_candidates);
    for_each_transform(config.grid, [&](Transform& t) {
        if (t.kind == Transform::Kind::derivative && t.spline_dimension == 0)
            t.spline_dimension = std::max(chosen, t.order + 4);
    });
    config.has_auto_spline = false;
}

void override_c_grid(CandidateGrid& grid, const std::vector<double>& values)
{
    if (values.empty())
        bad("C override list is empty");
    for (double c : values)
        if (!(c > 0.0) || !std::isfinite(c))
            bad("C values must be positive and finite");
    for (auto& e : grid.entries)
        e.c_values = values;
}

void override_sigma_grid(CandidateGrid& grid, const std::vector<double>& values)
{
    if (values.empty())
        bad("sigma override list is empty");
    for (auto& e : grid.entries) {
        std::vector<FunctionalKernel> kernels;
        std::vector<std::vector<Transform>> seen;
        for (const auto& k : e.kernels) {
            if (k.base.kind != BaseKernelSpec::Kind::gaussian) {
                kernels.push_back(k);
                continue;
            }
            if (std::find(seen.begin(), seen.end(), k.transforms) != seen.end())
                continue;
            seen.push_back(k.transforms);
            for (double s : values) {
                FunctionalKernel g = k;
                g.base = BaseKernelSpec::gaussian(s);
                g.base.validate();
                kernels.push_back(std::move(g));
            }
        }
        e.kernels = std::move(kernels);
    }
}

void override_dimensions(CandidateGrid& grid, const std::vector<int>& dimensions)
{
    if (!grid.projection)
        bad("dimension override needs a projection family in the grid");
    if (dimensions.empty())
        bad("dimension override list is empty");
    if (grid.entries.empty())
        bad("candidate grid is empty");
    const DimensionEntry prototype = grid.entries.front();
    grid.entries.clear();
    for (int d : dimensions) {
        if (d < 1)
            bad("projection dimensions must be positive");
        DimensionEntry e = prototype;
        e.dimension = d;
        grid.entries.push_back(std::move(e));
    }
}

std::vector<double> parse_number_list(const std::string& text)
{
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t pos = std::min(text.find(',', start), text.size());
        const std::string cell = text.substr(start, pos - start);
        try {
            out.push_back(parse_double(cell, "number list"));
        } catch (const Error& e) {
            bad(e.what());
        }
        start = pos + 1;
    }
    return out;
}

std::vector<int> parse_int_list(const std::string& text)
{
    std::vector<int> out;
    auto as_int = [](const std::string& s) {
        double v = 0.0;
        try {
            v = parse_double(s, "integer list");
        } catch (const Error& e) {
            bad(e.what());
        }
        if (v != std::floor(v) || std::abs(v) > 1e9)
            bad("'" + s + "' is not an integer");
        return static_cast<int>(v);
    };
    const auto colon = text.find(':');
    if (colon != std::string::npos) {
        const int from = as_int(text.substr(0, colon));
        const int to = as_int(text.substr(colon + 1));
        if (to < from)
            bad("range '" + text + "' is empty");
        for (int d = from; d <= to; ++d)
            out.push_back(d);
        return out;
    }
    for (double v : parse_number_list(text)) {
        if (v != std::floor(v))
            bad("'" + text + "' holds a non-integer");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

} // namespace fsvm
