#include "cdrflow/model_io.hpp"

#include <map>
#include <optional>

#include <fmt/format.h>

#include "cdrflow/error.hpp"
#include "cdrflow/text.hpp"

namespace cdrflow::arima {

namespace {

std::string sanitize(std::string s) {
    for (char& ch : s) {
        if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
    }
    return s;
}

}  // namespace

std::string to_csv(const SavedModel& saved) {
    const auto& m = saved.model;
    std::string out{kModelHeader};
    out += '\n';
    auto row = [&out](std::string_view key, const std::string& value) {
        out += fmt::format("{},{}\n", key, value);
    };
    row("p", std::to_string(m.spec.p));
    row("d", std::to_string(m.spec.d));
    row("q", std::to_string(m.spec.q));
    row("c", text::format_double(m.c));
    for (std::size_t i = 0; i < m.phi.size(); ++i) {
        row(fmt::format("phi{}", i + 1), text::format_double(m.phi[i]));
    }
    for (std::size_t i = 0; i < m.theta.size(); ++i) {
        row(fmt::format("theta{}", i + 1), text::format_double(m.theta[i]));
    }
    row("sigma2", text::format_double(m.sigma2));
    row("converged", m.converged ? "true" : "false");
    row("stationary", m.stationary ? "true" : "false");
    row("invertible", m.invertible ? "true" : "false");
    row("iterations", std::to_string(m.iterations));
    row("series_start", timeutil::format_iso8601(saved.series_start));
    row("bucket_width_s", std::to_string(saved.bucket_width_s));
    row("train_length", std::to_string(saved.train_length));
    for (const auto& w : m.warnings) row("warning", sanitize(w));
    return out;
}

SavedModel model_from_csv(std::span<const std::string> lines) {
    std::map<std::string, std::string, std::less<>> kv;
    std::vector<std::string> warnings;
    bool header_seen = false;
    for (const auto& raw : lines) {
        const auto line = text::trim(raw);
        if (line.empty()) continue;
        if (!header_seen) {
            if (line != kModelHeader) {
                throw MalformedRow("bad_header", "model file must start with 'parameter,value'");
            }
            header_seen = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string_view::npos) {
            throw MalformedRow("field_count", std::string(line));
        }
        std::string key{text::trim(line.substr(0, comma))};
        std::string value{text::trim(line.substr(comma + 1))};
        if (key == "warning") {
            warnings.push_back(std::move(value));
        } else if (!kv.emplace(key, std::move(value)).second) {
            throw MalformedRow("duplicate", "repeated model parameter '" + key + "'");
        }
    }
    if (!header_seen) throw MalformedRow("bad_header", "empty model file");

    auto get = [&kv](const std::string& key) -> const std::string& {
        const auto it = kv.find(key);
        if (it == kv.end()) throw MalformedRow("missing_parameter", key);
        return it->second;
    };
    auto count = [&](const std::string& key) {
        const auto v = text::to_int(get(key));
        if (!v || *v < 0) throw MalformedRow("bad_number", key);
        return static_cast<std::size_t>(*v);
    };
    auto real = [&](const std::string& key) {
        const auto v = text::to_double(get(key));
        if (!v) throw MalformedRow("bad_number", key);
        return *v;
    };
    auto flag = [&kv](const std::string& key) {
        const auto it = kv.find(key);
        return it == kv.end() || it->second == "true";
    };

    SavedModel s;
    auto& m = s.model;
    m.spec = {count("p"), count("d"), count("q")};
    m.c = real("c");
    for (std::size_t i = 1; i <= m.spec.p; ++i) m.phi.push_back(real(fmt::format("phi{}", i)));
    for (std::size_t i = 1; i <= m.spec.q; ++i) m.theta.push_back(real(fmt::format("theta{}", i)));
    m.sigma2 = real("sigma2");
    m.converged = flag("converged");
    m.stationary = flag("stationary");
    m.invertible = flag("invertible");
    if (kv.contains("iterations")) m.iterations = count("iterations");
    m.warnings = std::move(warnings);
    const auto start = timeutil::parse_iso8601(get("series_start"));
    if (!start) throw MalformedRow("bad_timestamp", "series_start");
    s.series_start = *start;
    const auto width = text::to_int(get("bucket_width_s"));
    if (!width || *width <= 0) throw MalformedRow("bad_number", "bucket_width_s");
    s.bucket_width_s = *width;
    s.train_length = count("train_length");
    return s;
}

}  // namespace cdrflow::arima
