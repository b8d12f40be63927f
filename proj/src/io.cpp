#include "fsvm/io.hpp"

#include "fsvm/config.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

namespace fsvm {

const char* to_string(DatasetFormat format) noexcept
{
    switch (format) {
    case DatasetFormat::csv_rows: return "csv_rows";
    case DatasetFormat::tecator: return "tecator";
    case DatasetFormat::phoneme: return "phoneme";
    }
    return "unknown";
}

DatasetFormat dataset_format_from_string(const std::string& name)
{
    for (auto f : {DatasetFormat::csv_rows, DatasetFormat::tecator, DatasetFormat::phoneme})
        if (name == to_string(f))
            return f;
    throw Error(ErrorKind::configuration, "unknown dataset format '" + name + "'");
}

std::string format_double(double value)
{
    std::array<char, 64> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), end);
}

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' || s.front() == '"'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"'))
        s.remove_suffix(1);
    return s;
}

std::optional<double> try_parse(std::string_view text)
{
    text = trim(text);
    if (!text.empty() && text.front() == '+')
        text.remove_prefix(1);
    if (text.empty())
        return std::nullopt;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value))
        return std::nullopt;
    return value;
}

std::vector<std::string_view> split_cells(std::string_view line, char separator)
{
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(separator, start);
        cells.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return cells;
}

std::vector<std::string_view> split_whitespace(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (std::isspace(static_cast<unsigned char>(line[i])) || line[i] == ','))
            ++i;
        const std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])) && line[i] != ',')
            ++i;
        if (i > start)
            out.push_back(line.substr(start, i - start));
    }
    return out;
}

struct Line {
    std::size_t number;
    std::string text;
};

std::vector<Line> read_lines(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::parse, "cannot open '" + path.string() + "'");
    std::vector<Line> lines;
    std::string text;
    std::size_t number = 0;
    while (std::getline(in, text)) {
        ++number;
        const auto t = trim(text);
        if (t.empty() || t.front() == '#')
            continue;
        lines.push_back({number, std::string(t)});
    }
    return lines;
}

[[noreturn]] void parse_error(const std::filesystem::path& path, std::size_t line, const std::string& what)
{
    throw Error(ErrorKind::parse, path.filename().string() + ":" + std::to_string(line) + ": " + what);
}

GridPtr resolve_grid(const DatasetDescriptor& d, const std::vector<double>& header_abscissae, std::size_t points,
                     std::pair<double, double> default_interval)
{
    std::vector<double> t;
    if (!d.abscissae.empty())
        t = d.abscissae;
    else if (!header_abscissae.empty())
        t = header_abscissae;
    else if (d.interval)
        return SamplingGrid::uniform(d.interval->first, d.interval->second, points);
    else if (d.fallback_grid)
        return d.fallback_grid;
    else
        return SamplingGrid::uniform(default_interval.first, default_interval.second, points);
    if (t.size() != points)
        throw Error(ErrorKind::structural, "declared grid has " + std::to_string(t.size())
                                               + " points but the file rows have " + std::to_string(points));
    return std::make_shared<const SamplingGrid>(std::move(t));
}

int map_label(const DatasetDescriptor& d, std::string_view raw, std::size_t line)
{
    if (!d.label_map.empty()) {
        const auto it = d.label_map.find(std::string(raw));
        if (it == d.label_map.end())
            parse_error(d.path, line, "label '" + std::string(raw) + "' has no mapping");
        return it->second;
    }
    const auto v = try_parse(raw);
    if (!v || (*v != 1.0 && *v != -1.0))
        parse_error(d.path, line, "label '" + std::string(raw) + "' is not -1 or +1");
    return *v > 0 ? 1 : -1;
}

struct RawTable {
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    std::vector<double> header_abscissae;
};

RawTable read_csv_rows(const DatasetDescriptor& d, bool want_labels)
{
    const auto lines = read_lines(d.path);
    RawTable table;
    std::size_t first = 0;
    std::size_t width = 0;
    if (!lines.empty()) {
        const auto cells = split_cells(lines[0].text, ',');
        bool header = false;
        if (!cells.empty() && (cells.back() == "label" || cells.back() == "Label" || cells.back() == "LABEL"))
            header = true;
        for (std::size_t c = 0; c + 1 < cells.size(); ++c)
            if (!try_parse(cells[c]))
                header = true;
        if (header) {
            first = 1;
            const std::size_t value_cells = d.unlabeled && cells.back() != "label" ? cells.size() : cells.size() - 1;
            std::vector<double> t;
            for (std::size_t c = 0; c < value_cells; ++c) {
                const auto v = try_parse(cells[c]);
                if (!v) {
                    t.clear();
                    break;
                }
                t.push_back(*v);
            }
            table.header_abscissae = std::move(t);
        }
    }
    for (std::size_t i = first; i < lines.size(); ++i) {
        const auto cells = split_cells(lines[i].text, ',');
        if (width == 0)
            width = cells.size();
        if (cells.size() != width)
            parse_error(d.path, lines[i].number,
                        "row has " + std::to_string(cells.size()) + " cells, expected " + std::to_string(width));
        const std::size_t value_cells = d.unlabeled ? cells.size() : cells.size() - 1;
        if (value_cells < 2)
            parse_error(d.path, lines[i].number, "row has fewer than two values");
        std::vector<double> row(value_cells);
        for (std::size_t c = 0; c < value_cells; ++c) {
            const auto v = try_parse(cells[c]);
            if (!v)
                parse_error(d.path, lines[i].number,
                            "cell " + std::to_string(c + 1) + " ('" + std::string(cells[c]) + "') is not a number");
            row[c] = *v;
        }
        table.rows.push_back(std::move(row));
        if (!d.unlabeled && want_labels)
            table.labels.push_back(map_label(d, cells.back(), lines[i].number));
    }
    if (table.rows.empty())
        throw Error(ErrorKind::parse, "'" + d.path.string() + "' contains no data rows");
    return table;
}

RawTable read_tecator(const DatasetDescriptor& d)
{
    constexpr std::size_t channels = 100;
    constexpr std::size_t full_record = 125;
    const auto lines = read_lines(d.path);
    std::vector<std::pair<std::size_t, std::vector<double>>> numeric;
    for (const auto& line : lines) {
        const auto tokens = split_whitespace(line.text);
        std::vector<double> values;
        bool ok = !tokens.empty();
        for (auto tok : tokens) {
            const auto v = try_parse(tok);
            if (!v) {
                ok = false;
                break;
            }
            values.push_back(*v);
        }
        if (!ok) {
            if (!numeric.empty())
                parse_error(d.path, line.number, "non-numeric content inside the tecator records");
            continue; // descriptive header
        }
        numeric.emplace_back(line.number, std::move(values));
    }
    if (numeric.empty())
        throw Error(ErrorKind::parse, "'" + d.path.string() + "' contains no tecator records");

    std::vector<std::vector<double>> records;
    const std::size_t width = numeric.front().second.size();
    const bool per_line = (width == channels + 3 || width == full_record)
                          && std::all_of(numeric.begin(), numeric.end(),
                                         [&](const auto& l) { return l.second.size() == width; });
    if (per_line) {
        for (auto& l : numeric)
            records.push_back(std::move(l.second));
    } else {
        std::vector<double> pool;
        for (const auto& l : numeric)
            pool.insert(pool.end(), l.second.begin(), l.second.end());
        if (pool.size() % full_record != 0)
            parse_error(d.path, numeric.back().first,
                        "tecator data holds " + std::to_string(pool.size())
                            + " numbers, not a multiple of the 125-value record layout");
        for (std::size_t r = 0; r < pool.size(); r += full_record)
            records.emplace_back(pool.begin() + static_cast<std::ptrdiff_t>(r),
                                 pool.begin() + static_cast<std::ptrdiff_t>(r + full_record));
    }

    RawTable table;
    for (auto& rec : records) {
        const double fat = rec[rec.size() - 2];
        table.labels.push_back(fat > d.fat_threshold ? 1 : -1);
        rec.resize(channels);
        table.rows.push_back(std::move(rec));
    }
    return table;
}

RawTable read_phoneme(const DatasetDescriptor& d)
{
    const auto lines = read_lines(d.path);
    if (lines.empty())
        throw Error(ErrorKind::parse, "'" + d.path.string() + "' is empty");
    const auto header = split_cells(lines[0].text, ',');
    std::vector<std::size_t> value_columns;
    std::optional<std::size_t> class_column;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c].size() > 2 && header[c].substr(0, 2) == "x.")
            value_columns.push_back(c);
        else if (header[c] == "g")
            class_column = c;
    }
    if (value_columns.empty() || !class_column)
        parse_error(d.path, lines[0].number, "phoneme header needs x.1..x.N columns and a 'g' column");

    std::map<std::string, int> mapping = d.label_map;
    if (mapping.empty())
        mapping = {{"aa", 1}, {"ao", -1}};
    RawTable table;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto cells = split_cells(lines[i].text, ',');
        if (cells.size() != header.size())
            parse_error(d.path, lines[i].number,
                        "row has " + std::to_string(cells.size()) + " cells, expected " + std::to_string(header.size()));
        const auto it = mapping.find(std::string(cells[*class_column]));
        if (it == mapping.end())
            continue;
        std::vector<double> row;
        for (std::size_t c : value_columns) {
            const auto v = try_parse(cells[c]);
            if (!v)
                parse_error(d.path, lines[i].number, "cell '" + std::string(cells[c]) + "' is not a number");
            row.push_back(*v);
        }
        table.rows.push_back(std::move(row));
        table.labels.push_back(it->second);
    }
    if (table.rows.empty())
        throw Error(ErrorKind::parse, "'" + d.path.string() + "' has no rows of the selected classes");
    return table;
}

RawTable read_table(const DatasetDescriptor& d, bool want_labels)
{
    switch (d.format) {
    case DatasetFormat::csv_rows: return read_csv_rows(d, want_labels);
    case DatasetFormat::tecator: return read_tecator(d);
    case DatasetFormat::phoneme: return read_phoneme(d);
    }
    throw Error(ErrorKind::configuration, "unknown dataset format");
}

std::vector<SampledFunction> to_functions(const DatasetDescriptor& d, RawTable& table)
{
    std::pair<double, double> interval{0.0, 1.0};
    if (d.format == DatasetFormat::tecator)
        interval = {850.0, 1050.0};
    const GridPtr grid = resolve_grid(d, table.header_abscissae, table.rows.front().size(), interval);
    std::vector<SampledFunction> out;
    out.reserve(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        try {
            out.emplace_back(grid, std::move(table.rows[i]));
        } catch (const Error& e) {
            rethrow_with_index(e, i);
        }
    }
    return out;
}

std::uint64_t fnv1a(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void put_u64(std::string& out, std::uint64_t v)
{
    for (int i = 0; i < 8; ++i)
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(std::string_view in)
{
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[static_cast<std::size_t>(i)])) << (8 * i);
    return v;
}

} // namespace

double parse_double(std::string_view text, const std::string& context)
{
    const auto v = try_parse(text);
    if (!v)
        throw Error(ErrorKind::parse, context + ": '" + std::string(text) + "' is not a number");
    return *v;
}

LabeledDataset load_dataset(const DatasetDescriptor& descriptor)
{
    if (descriptor.unlabeled)
        throw Error(ErrorKind::configuration, "an unlabeled file cannot be loaded as a labeled dataset");
    RawTable table = read_table(descriptor, true);
    std::vector<int> labels = std::move(table.labels);
    return LabeledDataset(to_functions(descriptor, table), std::move(labels));
}

std::vector<SampledFunction> load_curves(const DatasetDescriptor& descriptor)
{
    RawTable table = read_table(descriptor, false);
    return to_functions(descriptor, table);
}

void write_csv(const LabeledDataset& data, const std::filesystem::path& path)
{
    std::string out;
    const auto& t = data.grid()->abscissae();
    for (double x : t) {
        out += format_double(x);
        out += ',';
    }
    out += "label\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (double x : data.function(i).values()) {
            out += format_double(x);
            out += ',';
        }
        out += data.label(i) > 0 ? "1\n" : "-1\n";
    }
    write_file_atomic(path, out);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error(ErrorKind::data, "cannot write '" + tmp.string() + "'");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out)
            throw Error(ErrorKind::data, "failed writing '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::parse, "cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string serialize_model(const SvmModel& model)
{
    Json payload;
    payload["format"] = "fsvm-model";
    payload["version"] = model_format_version;
    payload["kernel"] = to_json(model.kernel());
    payload["grid"] = {{"abscissae", model.grid()->abscissae()}, {"weights", model.grid()->weights()}};
    payload["bias"] = model.bias();
    payload["metadata"] = {{"C", model.metadata().C},
                           {"seed", model.metadata().seed},
                           {"training_size", model.metadata().training_size}};
    Json support = Json::array();
    for (std::size_t i = 0; i < model.support().size(); ++i) {
        const auto& v = model.support()[i];
        support.push_back({{"alpha", model.alphas()[i]},
                           {"label", model.labels()[i]},
                           {"vector", std::vector<double>(v.data(), v.data() + v.size())}});
    }
    payload["support"] = std::move(support);
    const std::string body = payload.dump();

    std::string out = "FSVM";
    out.push_back(static_cast<char>(model_format_version));
    put_u64(out, body.size());
    put_u64(out, fnv1a(body));
    out += body;
    return out;
}

SvmModel deserialize_model(const std::string& bytes)
{
    constexpr std::size_t header = 4 + 1 + 8 + 8;
    if (bytes.size() < 5 || bytes.compare(0, 4, "FSVM") != 0)
        throw Error(ErrorKind::integrity, "not a model file (missing FSVM magic)");
    const auto version = static_cast<unsigned char>(bytes[4]);
    if (version != model_format_version)
        throw Error(ErrorKind::integrity, "unsupported model format version " + std::to_string(version));
    if (bytes.size() < header)
        throw Error(ErrorKind::integrity, "model file is truncated");
    const std::uint64_t length = get_u64(std::string_view(bytes).substr(5, 8));
    const std::uint64_t hash = get_u64(std::string_view(bytes).substr(13, 8));
    if (bytes.size() - header != length)
        throw Error(ErrorKind::integrity, "model payload length mismatch (truncated or padded file)");
    const std::string_view body = std::string_view(bytes).substr(header);
    if (fnv1a(body) != hash)
        throw Error(ErrorKind::integrity, "model payload checksum mismatch");

    try {
        const Json payload = Json::parse(body);
        if (payload.at("format") != "fsvm-model" || payload.at("version") != model_format_version)
            throw Error(ErrorKind::integrity, "model payload has an unexpected format tag");
        auto grid = std::make_shared<const SamplingGrid>(payload.at("grid").at("abscissae").get<std::vector<double>>(),
                                                         payload.at("grid").at("weights").get<std::vector<double>>());
        std::vector<Eigen::VectorXd> support;
        std::vector<double> alphas;
        std::vector<int> labels;
        for (const auto& sv : payload.at("support")) {
            const auto v = sv.at("vector").get<std::vector<double>>();
            support.emplace_back(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
            alphas.push_back(sv.at("alpha").get<double>());
            labels.push_back(sv.at("label").get<int>());
        }
        const auto& meta = payload.at("metadata");
        ModelMetadata metadata{meta.at("C").get<double>(), meta.at("seed").get<std::uint64_t>(),
                               meta.at("training_size").get<std::size_t>()};
        return SvmModel(kernel_from_json(payload.at("kernel")), std::move(grid), std::move(support),
                        std::move(alphas), std::move(labels), payload.at("bias").get<double>(), metadata);
    } catch (const Json::exception& e) {
        throw Error(ErrorKind::integrity, std::string("malformed model payload: ") + e.what());
    }
}

void save_model(const SvmModel& model, const std::filesystem::path& path)
{
    write_file_atomic(path, serialize_model(model));
}

SvmModel load_model(const std::filesystem::path& path)
{
    return deserialize_model(read_file(path));
}

} // namespace fsvm
