#include "cdrflow/cli.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "cdrflow/adf.hpp"
#include "cdrflow/arima.hpp"
#include "cdrflow/cluster.hpp"
#include "cdrflow/correlogram.hpp"
#include "cdrflow/error.hpp"
#include "cdrflow/ingest.hpp"
#include "cdrflow/mlp.hpp"
#include "cdrflow/model_io.hpp"
#include "cdrflow/plot.hpp"
#include "cdrflow/scrub.hpp"
#include "cdrflow/series.hpp"
#include "cdrflow/synth.hpp"
#include "cdrflow/text.hpp"

namespace cdrflow::cli {

std::uint64_t stage_seed(std::uint64_t seed, std::string_view stage) noexcept {
    // FNV-1a over the stage name, then one splitmix64 round.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : stage) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    std::uint64_t z = seed ^ h;
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

[[noreturn]] void usage(const std::string& message) {
    throw Error(ErrorKind::InvalidArgument, message);
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
    f << content;
    if (!f) throw Error(ErrorKind::Io, "failed writing '" + path + "'");
}

/// Writes to `path`, or to `out` when no path (or "-") was given.
void emit(const std::string& path, const std::string& content, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << content;
    } else {
        write_file(path, content);
    }
}

/// Human summaries go to stdout, unless stdout already carries the CSV.
std::ostream& summary_stream(const std::string& csv_path, std::ostream& out, std::ostream& err) {
    return (csv_path.empty() || csv_path == "-") ? err : out;
}

struct Shared {
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
    std::string config;
    std::string svg;
};

void add_shared(CLI::App* sub, Shared& s, bool with_svg) {
    sub->add_option("--seed", s.seed, "Master seed, fanned out per stage");
    sub->add_option("--jobs", s.jobs, "Parallel workers across independent series")
        ->check(CLI::PositiveNumber);
    sub->add_option("--config", s.config, "key=value file; command-line flags win");
    if (with_svg) sub->add_option("--svg", s.svg, "Also render an SVG plot to this path");
}

// ---------------------------------------------------------------- loading

ingest::HeaderMode parse_header_mode(const std::string& s) {
    if (s == "auto") return ingest::HeaderMode::Auto;
    if (s == "present" || s == "yes") return ingest::HeaderMode::Present;
    if (s == "absent" || s == "no") return ingest::HeaderMode::Absent;
    usage("--header must be auto, present or absent");
}

char parse_delimiter(const std::string& s) {
    if (s == "\\t" || s == "tab") return '\t';
    if (s.size() != 1) usage("--delimiter must be a single character");
    return s[0];
}

timeutil::EpochSeconds parse_instant(const std::string& s, const char* flag) {
    const auto t = timeutil::parse_iso8601(s);
    if (!t) usage(fmt::format("{} expects an ISO-8601 instant, got '{}'", flag, s));
    return *t;
}

struct SeriesSource {
    std::string series;
    std::string events;
    std::string activity;
    std::string format = "canonical";
    std::string delimiter = ",";
    std::string user = "crawdad";
    std::string header = "auto";
    std::optional<std::int64_t> width;
    std::optional<std::string> metric;
    std::optional<std::string> start;
    std::optional<std::string> end;
    std::string epoch = "1970-01-01T00:00:00Z";
    std::int64_t step_ms = 1;
    std::string label;
};

void add_source(CLI::App* sub, SeriesSource& s, bool allow_series) {
    auto* group = sub->add_option_group("input");
    if (allow_series) {
        group->add_option("--series", s.series, "Activity series CSV (bucket_start_iso8601,value)");
    }
    group->add_option("--events", s.events, "Event file, bucketized on the fly");
    group->add_option("--activity", s.activity, "Aggregated grid-cell activity file");
    group->require_option(1);
    sub->add_option("--format", s.format, "Event file layout: crawdad|nodobo|canonical");
    sub->add_option("--delimiter", s.delimiter, "Field delimiter");
    sub->add_option("--user", s.user, "user_id assigned to CRAWDAD rows");
    sub->add_option("--header", s.header, "Header line: auto|present|absent");
    sub->add_option("--width", s.width, "Bucket width in seconds")->check(CLI::PositiveNumber);
    sub->add_option("--metric", s.metric, "count|duration|activity");
    sub->add_option("--start", s.start, "First bucket start (ISO-8601)");
    sub->add_option("--end", s.end, "Exclusive end of the bucket range (ISO-8601)");
    sub->add_option("--epoch", s.epoch, "Instant that raw aggregated timestamp 0 maps to");
    sub->add_option("--step-ms", s.step_ms, "Milliseconds per raw aggregated timestamp unit")
        ->check(CLI::PositiveNumber);
    sub->add_option("--label", s.label, "Series label");
}

series::ActivitySeries load_series_csv(const std::string& path) {
    const auto lines = text::read_lines(path);
    return series::from_csv(lines);
}

series::ActivitySeries load_source(const SeriesSource& s) {
    if (!s.series.empty()) return load_series_csv(s.series);

    ingest::ParseOptions popts;
    popts.delimiter = parse_delimiter(s.delimiter);
    popts.user_id = s.user;
    const auto header = parse_header_mode(s.header);
    series::BucketOptions b;
    if (s.start) b.start = parse_instant(*s.start, "--start");
    if (s.end) b.end = parse_instant(*s.end, "--end");
    b.label = s.label;
    if (s.metric) {
        const auto m = series::parse_metric(*s.metric);
        if (!m) usage("unknown --metric '" + *s.metric + "'");
        b.metric = *m;
    }

    if (!s.events.empty()) {
        const auto format = ingest::parse_format(s.format);
        if (!format) usage("unknown --format '" + s.format + "'");
        const auto lines = text::read_lines(s.events);
        const auto cleaned = ingest::ingest_events(lines, *format, popts, header);
        b.width_s = s.width.value_or(series::kDefaultEventBucketWidth);
        if (!s.metric) b.metric = series::Metric::EventCount;
        return series::bucketize(std::span<const ingest::CdrEvent>(cleaned.records), b);
    }
    const auto lines = text::read_lines(s.activity);
    const auto cleaned = ingest::ingest_activity(lines, popts, header);
    b.width_s = s.width.value_or(series::kDefaultBucketWidth);
    if (!s.metric) b.metric = series::Metric::ActivitySum;
    b.time_mapping.epoch_s = parse_instant(s.epoch, "--epoch");
    b.time_mapping.step_ms = s.step_ms;
    return series::bucketize(std::span<const ingest::AggregatedActivity>(cleaned.records), b);
}

arima::ArimaSpec parse_spec(const std::string& text) {
    const auto parts = text::split(text, ',');
    if (parts.size() != 3) usage("--spec expects p,d,q");
    std::size_t v[3];
    for (std::size_t i = 0; i < 3; ++i) {
        const auto n = text::to_int(parts[i]);
        if (!n || *n < 0) usage("--spec expects three non-negative integers");
        v[i] = static_cast<std::size_t>(*n);
    }
    arima::ArimaSpec spec{v[0], v[1], v[2]};
    arima::validate(spec);
    return spec;
}

std::string format_spec(const arima::ArimaSpec& s) {
    return fmt::format("{},{},{}", s.p, s.d, s.q);
}

std::vector<double> index_axis(std::size_t n) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<double>(i);
    return x;
}

plot::Trace line_trace(std::string label, std::vector<double> y, std::string color,
                       std::size_t offset = 0) {
    plot::Trace t;
    t.label = std::move(label);
    t.x = index_axis(y.size());
    for (auto& x : t.x) x += static_cast<double>(offset);
    t.y = std::move(y);
    t.color = std::move(color);
    return t;
}

void maybe_svg(const Shared& shared, const plot::Figure& fig) {
    if (!shared.svg.empty()) write_file(shared.svg, plot::render_svg(fig));
}

// ---------------------------------------------------------------- commands

struct SynthArgs {
    std::string profile = "weekly";
    std::string out;
    std::string truth;
};

void cmd_synth(const SynthArgs& a, const Shared& shared, std::ostream& out) {
    const auto profile = synth::profile_by_name(a.profile);
    if (!profile) usage("unknown --profile '" + a.profile + "'");
    const auto corpus = synth::generate(*profile, stage_seed(shared.seed, "synth"));
    emit(a.out, synth::events_csv(corpus), out);
    if (!a.truth.empty()) write_file(a.truth, synth::truth_csv(corpus));
}

struct IngestArgs {
    std::string input;
    std::string format = "canonical";
    std::string delimiter = ",";
    std::string user = "crawdad";
    std::string header = "auto";
    std::string out;
};

void print_report(const ingest::IngestReport& r, std::ostream& s) {
    s << fmt::format("read={}\nkept={}\ndropped={}\n", r.rows_read, r.rows_kept, r.rows_dropped);
    for (const auto& [reason, n] : r.drop_reasons) s << fmt::format("dropped.{}={}\n", reason, n);
}

void cmd_ingest(const IngestArgs& a, std::ostream& out, std::ostream& err) {
    const auto format = ingest::parse_format(a.format);
    if (!format) usage("unknown --format '" + a.format + "'");
    ingest::ParseOptions popts;
    popts.delimiter = parse_delimiter(a.delimiter);
    popts.user_id = a.user;
    const auto header = parse_header_mode(a.header);
    const auto lines = text::read_lines(a.input);

    std::string csv;
    ingest::IngestReport report;
    if (*format == ingest::Format::TelecomItalia) {
        auto cleaned = ingest::ingest_activity(lines, popts, header);
        csv = std::string(ingest::kActivityHeader) + "\n";
        for (const auto& r : cleaned.records) csv += ingest::to_activity_row(r) + "\n";
        report = std::move(cleaned.report);
    } else {
        auto cleaned = ingest::ingest_events(lines, *format, popts, header);
        csv = std::string(ingest::kCanonicalHeader) + "\n";
        for (const auto& e : cleaned.records) csv += ingest::to_canonical_row(e) + "\n";
        report = std::move(cleaned.report);
    }
    emit(a.out, csv, out);
    print_report(report, summary_stream(a.out, out, err));
}

struct BucketizeArgs {
    SeriesSource source;
    std::string out;
};

void cmd_bucketize(const BucketizeArgs& a, const Shared& shared, std::ostream& out) {
    const auto s = load_source(a.source);
    emit(a.out, series::to_csv(s), out);
    maybe_svg(shared, {"Activity per bucket", "bucket", std::string(series::to_string(s.metric)),
                       {line_trace("activity", s.values, "#1f77b4")}});
}

struct DetectArgs {
    SeriesSource source;
    std::size_t k = 3;
    std::size_t restarts = 10;
    std::string zero_window = "08:00-22:00";
    std::string out;
    std::string series_out;
};

void cmd_detect(const DetectArgs& a, const Shared& shared, std::ostream& out) {
    const auto s = load_source(a.source);
    cluster::DetectOptions opts;
    opts.k = a.k;
    opts.restarts = a.restarts;
    opts.seed = stage_seed(shared.seed, "detect");
    if (a.zero_window != "none") {
        opts.zero_window = cluster::parse_window(a.zero_window);
        if (!opts.zero_window) usage("--zero-window expects HH:MM-HH:MM or none");
    }
    const auto report = cluster::detect_anomalies(s, opts);
    emit(a.out, cluster::to_csv(report, s), out);
    if (!a.series_out.empty()) write_file(a.series_out, series::to_csv(s));

    plot::Trace marks;
    marks.label = "anomalous";
    marks.color = "#d62728";
    marks.scatter = true;
    for (const auto& l : report.anomalous_buckets) {
        marks.x.push_back(static_cast<double>(l.bucket));
        marks.y.push_back(s.values[l.bucket]);
    }
    maybe_svg(shared, {"Anomalous buckets", "bucket", "activity",
                       {line_trace("activity", s.values, "#1f77b4"), marks}});
}

struct ScrubArgs {
    std::string series;
    std::string report;
    std::vector<std::string> pool_series;
    std::vector<std::string> pool_reports;
    std::string out;
    std::string sidecar;
};

void cmd_scrub(const ScrubArgs& a, const Shared& shared, std::ostream& out) {
    if (a.pool_series.size() != a.pool_reports.size()) {
        usage("--pool-series and --pool-report must be given the same number of times");
    }
    const auto target = load_series_csv(a.series);
    const auto target_report = cluster::report_from_csv(text::read_lines(a.report), target);

    scrub::ScrubbedSeries scrubbed;
    if (a.pool_series.empty()) {
        scrubbed = scrub::make_anomaly_free(target, target_report);
    } else {
        std::vector<series::ActivitySeries> others;
        std::vector<cluster::AnomalyReport> reports;
        others.reserve(a.pool_series.size());
        reports.reserve(a.pool_series.size());
        for (std::size_t i = 0; i < a.pool_series.size(); ++i) {
            others.push_back(load_series_csv(a.pool_series[i]));
            reports.push_back(cluster::report_from_csv(text::read_lines(a.pool_reports[i]), others.back()));
        }
        std::vector<scrub::LabeledSeries> pool{{&target, &target_report}};
        for (std::size_t i = 0; i < others.size(); ++i) pool.push_back({&others[i], &reports[i]});
        scrubbed = scrub::make_anomaly_free_pooled(pool);
    }
    emit(a.out, series::to_csv(scrubbed.series), out);
    if (!a.sidecar.empty()) write_file(a.sidecar, scrub::sidecar_csv(scrubbed));
    maybe_svg(shared, {"Anomaly-free series", "bucket", "activity",
                       {line_trace("raw", target.values, "#aaaaaa"),
                        line_trace("scrubbed", scrubbed.series.values, "#1f77b4")}});
}

struct NnArgs {
    std::string raw;
    std::string clean;
    std::string report;
    std::size_t window = 12;
    mlp::TrainConfig config;
    std::string raw_curve;
    std::string clean_curve;
    std::string out;
};

void cmd_nn_compare(NnArgs a, const Shared& shared, std::ostream& out) {
    const auto raw = load_series_csv(a.raw);
    scrub::ScrubbedSeries clean;
    if (!a.report.empty()) {
        clean = scrub::make_anomaly_free(raw, cluster::report_from_csv(text::read_lines(a.report), raw));
    } else {
        clean.series = load_series_csv(a.clean);
    }
    a.config.seed = stage_seed(shared.seed, "mlp");
    const auto cmp = mlp::compare_anomaly_effect(raw, clean, a.window, a.config, shared.jobs > 1);

    if (!a.raw_curve.empty()) write_file(a.raw_curve, mlp::curve_csv(cmp.raw));
    if (!a.clean_curve.empty()) write_file(a.clean_curve, mlp::curve_csv(cmp.clean));

    std::string summary = "model,mse_train,mse_val,mse_test,best_epoch\n";
    for (const auto& [name, r] : {std::pair{"raw", &cmp.raw}, std::pair{"clean", &cmp.clean}}) {
        summary += fmt::format("{},{},{},{},{}\n", name, text::format_double(r->mse_train),
                               text::format_double(r->mse_val), text::format_double(r->mse_test),
                               r->best_epoch);
    }
    summary += fmt::format("# mse_raw > mse_clean: {}\n",
                           cmp.raw.mse_test > cmp.clean.mse_test ? "true" : "false");
    emit(a.out, summary, out);

    auto curve = [](const mlp::FitReport& r, bool val) {
        std::vector<double> y;
        for (const auto& p : r.curve) y.push_back(val ? p.mse_val : p.mse_train);
        return y;
    };
    maybe_svg(shared, {"Training curves (normalized MSE)", "epoch", "mse",
                       {line_trace("raw train", curve(cmp.raw, false), "#d62728"),
                        line_trace("raw val", curve(cmp.raw, true), "#ff9896"),
                        line_trace("clean train", curve(cmp.clean, false), "#1f77b4"),
                        line_trace("clean val", curve(cmp.clean, true), "#aec7e8")}});
}

const arima::AdfTable& load_table(const std::string& path, std::optional<arima::AdfTable>& holder) {
    if (path.empty()) return arima::shipped_adf_table();
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::Io, "cannot read ADF table '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    holder = arima::AdfTable::parse(ss.str());
    return *holder;
}

struct AdfArgs {
    std::string series;
    std::optional<std::size_t> lags;
    std::size_t diff = 0;
    std::string table;
    std::string out;
};

void cmd_adf(const AdfArgs& a, std::ostream& out) {
    const auto s = load_series_csv(a.series);
    const auto w = series::difference(s.values, a.diff);
    std::optional<arima::AdfTable> holder;
    const auto& table = load_table(a.table, holder);
    const auto r = arima::adf_test(w.values, a.lags, &table);
    emit(a.out,
         fmt::format("statistic: {}\np_value: {}\nlags_used: {}\nnobs: {}\nconclusion: {}\n",
                     text::format_double(r.statistic), text::format_double(r.p_value), r.lags_used,
                     r.nobs, arima::to_string(r.conclusion)),
         out);
}

struct AdfTableArgs {
    std::vector<std::size_t> sizes = arima::default_adf_sample_sizes();
    std::size_t replications = arima::kAdfTableReplications;
    std::uint64_t table_seed = arima::kAdfTableSeed;
    std::string out;
};

void cmd_adf_table(const AdfTableArgs& a, const Shared& shared, std::ostream& out) {
    const auto table = arima::build_adf_table(a.sizes, a.replications, a.table_seed, shared.jobs);
    emit(a.out, table.serialize(), out);
}

struct CorrelogramArgs {
    std::string series;
    std::size_t diff = 0;
    std::optional<std::size_t> max_lag;
    std::string acf_out;
    std::string pacf_out;
};

void cmd_correlogram(const CorrelogramArgs& a, const Shared& shared, std::ostream& out,
                     std::ostream& err) {
    const auto s = load_series_csv(a.series);
    const auto w = series::difference(s.values, a.diff);
    const auto lag = a.max_lag.value_or(arima::default_max_lag(w.values.size()));
    const auto acf = arima::acf(w.values, lag);
    const auto pacf = arima::pacf_from_acf(acf);
    const auto acf_csv = arima::correlogram_csv(acf.values, 0, acf.conf_bound);
    const auto pacf_csv = arima::correlogram_csv(
        std::span<const double>(pacf.values).subspan(1), 1, pacf.conf_bound);
    const bool to_stdout = a.acf_out.empty() && a.pacf_out.empty();
    if (to_stdout) {
        out << acf_csv;
    } else {
        if (!a.acf_out.empty()) write_file(a.acf_out, acf_csv);
        if (!a.pacf_out.empty()) write_file(a.pacf_out, pacf_csv);
    }
    const auto spec = arima::suggest_order(acf, pacf, a.diff);
    (to_stdout ? err : out) << "suggested: " << format_spec(spec) << "\n";

    auto bars = [](std::string label, std::vector<double> y, std::size_t first, std::string color) {
        auto t = line_trace(std::move(label), std::move(y), std::move(color), first);
        t.scatter = true;
        return t;
    };
    maybe_svg(shared, {"Correlogram", "lag", "correlation",
                       {bars("acf", acf.values, 0, "#1f77b4"),
                        bars("pacf", {pacf.values.begin() + 1, pacf.values.end()}, 1, "#ff7f0e")}});
}

/// Picks d by repeated ADF testing, then (p, q) from the cut-off heuristic.
arima::ArimaSpec auto_spec(std::span<const double> values, std::size_t max_d) {
    std::size_t d = 0;
    auto w = series::difference(values, 0);
    while (d < max_d && arima::adf_test(w.values).conclusion == arima::AdfConclusion::NonStationary) {
        ++d;
        w = series::difference(values, d);
    }
    const auto acf = arima::acf(w.values, arima::default_max_lag(w.values.size()));
    return arima::suggest_order(acf, arima::pacf_from_acf(acf), d);
}

struct FitArgs {
    std::string series;
    std::optional<std::string> spec;
    double train_fraction = 0.7;
    std::size_t max_d = 2;
    std::string out;
    std::string predictions;
};

void cmd_fit(const FitArgs& a, std::ostream& out, std::ostream& err) {
    const auto s = load_series_csv(a.series);
    const auto [train, test] = series::split(s, a.train_fraction);
    const auto spec = a.spec ? parse_spec(*a.spec) : auto_spec(train.values, a.max_d);
    arima::SavedModel saved;
    saved.model = arima::fit(train.values, spec);
    saved.series_start = s.start;
    saved.bucket_width_s = s.bucket_width_s;
    saved.train_length = train.size();
    emit(a.out, arima::to_csv(saved), out);

    const auto ev = arima::evaluate(saved.model, train.values, test.values);
    auto& summary = summary_stream(a.out, out, err);
    summary << fmt::format("spec: {}\ntest_mse: {}\ntest_mae: {}\n", format_spec(spec),
                           text::format_double(ev.mse), text::format_double(ev.mae));
    for (const auto& w : saved.model.warnings) summary << "warning: " << w << "\n";
    if (!a.predictions.empty()) {
        std::string csv = "bucket_start_iso8601,actual,forecast\n";
        for (std::size_t i = 0; i < test.size(); ++i) {
            csv += fmt::format("{},{},{}\n", timeutil::format_iso8601(test.bucket_start(i)),
                               text::format_double(test.values[i]),
                               text::format_double(ev.predictions[i]));
        }
        write_file(a.predictions, csv);
    }
}

struct ForecastArgs {
    std::string model;
    std::optional<std::string> spec;
    std::string series;
    std::optional<double> train_fraction;
    std::optional<std::size_t> horizon;
    std::string mode = "multistep";
    std::string out;
};

void cmd_forecast(const ForecastArgs& a, const Shared& shared, std::ostream& out,
                  std::ostream& err) {
    if (a.model.empty() == !a.spec) usage("give exactly one of --model or --spec");
    if (a.mode != "multistep" && a.mode != "rolling") usage("--mode must be multistep or rolling");
    const auto s = load_series_csv(a.series);
    series::ActivitySeries history = s;
    std::optional<series::ActivitySeries> actual;
    if (a.train_fraction) {
        auto parts = series::split(s, *a.train_fraction);
        history = std::move(parts.first);
        actual = std::move(parts.second);
    }

    arima::ArimaModel model;
    if (!a.model.empty()) {
        auto saved = arima::model_from_csv(text::read_lines(a.model));
        if (saved.bucket_width_s != s.bucket_width_s) {
            throw Error(ErrorKind::DegenerateInput, "series bucket width differs from the model's");
        }
        model = std::move(saved.model);
    } else {
        model = arima::fit(history.values, parse_spec(*a.spec));
    }

    std::vector<double> pred;
    std::size_t horizon = 0;
    if (a.mode == "rolling") {
        if (!actual) usage("--mode rolling needs --train-fraction to hold out actual values");
        horizon = actual->size();
        const auto ev = arima::evaluate(model, history.values, actual->values);
        pred = ev.predictions;
        summary_stream(a.out, out, err)
            << fmt::format("rolling_mse: {}\nrolling_mae: {}\n", text::format_double(ev.mse),
                           text::format_double(ev.mae));
    } else {
        horizon = a.horizon.value_or(actual ? actual->size() : 24);
        pred = arima::forecast(model, history.values, horizon);
    }

    std::string csv = "bucket_start_iso8601,actual,forecast\n";
    const auto base = history.size();
    for (std::size_t i = 0; i < horizon; ++i) {
        const std::string act =
            (actual && i < actual->size()) ? text::format_double(actual->values[i]) : "";
        csv += fmt::format("{},{},{}\n", timeutil::format_iso8601(s.bucket_start(base + i)), act,
                           text::format_double(pred[i]));
    }
    emit(a.out, csv, out);

    std::vector<plot::Trace> traces{line_trace("history", history.values, "#1f77b4")};
    if (actual) traces.push_back(line_trace("actual", actual->values, "#2ca02c", base));
    traces.push_back(line_trace("forecast", pred, "#d62728", base));
    maybe_svg(shared, {"Forecast", "bucket", "activity", std::move(traces)});
}

// ---------------------------------------------------------------- config

std::string config_path(std::span<const std::string> args) {
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) usage("--config needs a path");
            return args[i + 1];
        }
        if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
    }
    return {};
}

/// Turns each `key=value` line into `--key=value`, placed before the user's
/// own flags so that the command line wins. Unknown keys are rejected.
std::vector<std::string> expand_config(const CLI::App& app, std::vector<std::string> args) {
    const auto path = config_path(args);
    if (path.empty() || args.empty()) return args;
    const auto* sub = app.get_subcommand_no_throw(args[0]);
    if (sub == nullptr) return args;

    std::vector<std::string> injected;
    std::size_t lineno = 0;
    for (const auto& raw : text::read_lines(path)) {
        ++lineno;
        const auto line = text::trim(raw);
        if (line.empty() || line.front() == '#' || line.front() == ';') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            usage(fmt::format("{}:{}: expected key=value", path, lineno));
        }
        std::string key{text::trim(line.substr(0, eq))};
        const auto value = text::trim(line.substr(eq + 1));
        std::replace(key.begin(), key.end(), '_', '-');
        if (key.rfind("--", 0) == 0) key.erase(0, 2);
        const auto* opt = sub->get_option_no_throw("--" + key);
        if (opt == nullptr || key == "config") {
            usage(fmt::format("{}:{}: unknown key '{}' for command '{}'", path, lineno, key,
                              args[0]));
        }
        injected.push_back(fmt::format("--{}={}", key, value));
    }
    args.insert(args.begin() + 1, injected.begin(), injected.end());
    return args;
}

int exit_code_for(const Error& e) {
    if (e.kind() == ErrorKind::InvalidArgument) return kExitUsage;
    if (is_numerical(e.kind())) return kExitNumerical;
    return kExitData;
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"cdrflow: CDR activity analytics (anomaly detection, scrubbing, forecasting)",
                 "cdrflow"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);

    Shared shared;
    std::function<void()> action;

    SynthArgs synth_a;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic event corpus with ground truth");
    synth->add_option("--profile", synth_a.profile, "weekly|clean|daily");
    synth->add_option("--out", synth_a.out, "Canonical events CSV (default: stdout)");
    synth->add_option("--truth", synth_a.truth, "Ground-truth anomaly sidecar CSV");
    add_shared(synth, shared, false);
    synth->callback([&] { action = [&] { cmd_synth(synth_a, shared, out); }; });

    IngestArgs ingest_a;
    auto* ingest = app.add_subcommand("ingest", "Parse a raw CDR file into canonical CSV");
    ingest->add_option("--input", ingest_a.input, "Raw input file")->required();
    ingest->add_option("--format", ingest_a.format, "crawdad|nodobo|telecom_italia|canonical");
    ingest->add_option("--delimiter", ingest_a.delimiter, "Field delimiter");
    ingest->add_option("--user", ingest_a.user, "user_id assigned to CRAWDAD rows");
    ingest->add_option("--header", ingest_a.header, "auto|present|absent");
    ingest->add_option("--out", ingest_a.out, "Output CSV (default: stdout)");
    add_shared(ingest, shared, false);
    ingest->callback([&] { action = [&] { cmd_ingest(ingest_a, out, err); }; });

    BucketizeArgs bucket_a;
    auto* bucket = app.add_subcommand("bucketize", "Aggregate records into an activity series");
    add_source(bucket, bucket_a.source, false);
    bucket->add_option("--out", bucket_a.out, "Series CSV (default: stdout)");
    add_shared(bucket, shared, true);
    bucket->callback([&] { action = [&] { cmd_bucketize(bucket_a, shared, out); }; });

    DetectArgs detect_a;
    auto* detect = app.add_subcommand("detect", "Label anomalous buckets with k-means and rules");
    add_source(detect, detect_a.source, true);
    detect->add_option("--k", detect_a.k, "Number of clusters")->check(CLI::PositiveNumber);
    detect->add_option("--restarts", detect_a.restarts, "k-means restarts")
        ->check(CLI::PositiveNumber);
    detect->add_option("--zero-window", detect_a.zero_window,
                       "Active hours HH:MM-HH:MM for zero-activity checks, or none");
    detect->add_option("--out", detect_a.out, "Anomaly report CSV (default: stdout)");
    detect->add_option("--series-out", detect_a.series_out, "Also write the analysed series");
    add_shared(detect, shared, true);
    detect->callback([&] { action = [&] { cmd_detect(detect_a, shared, out); }; });

    ScrubArgs scrub_a;
    auto* scrub = app.add_subcommand("scrub", "Replace anomalous buckets with the normal mean");
    scrub->add_option("--series", scrub_a.series, "Series CSV")->required();
    scrub->add_option("--report", scrub_a.report, "Anomaly report CSV for --series")->required();
    scrub->add_option("--pool-series", scrub_a.pool_series, "Extra series pooled into the mean")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    scrub->add_option("--pool-report", scrub_a.pool_reports, "Report for each --pool-series")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    scrub->add_option("--out", scrub_a.out, "Scrubbed series CSV (default: stdout)");
    scrub->add_option("--sidecar", scrub_a.sidecar, "Replaced-bucket sidecar CSV");
    add_shared(scrub, shared, true);
    scrub->callback([&] { action = [&] { cmd_scrub(scrub_a, shared, out); }; });

    NnArgs nn_a;
    auto* nn = app.add_subcommand("nn-compare", "Train on raw and scrubbed series and compare");
    nn->add_option("--raw", nn_a.raw, "Raw series CSV")->required();
    auto* clean_group = nn->add_option_group("clean input");
    clean_group->add_option("--clean", nn_a.clean, "Scrubbed series CSV");
    clean_group->add_option("--report", nn_a.report, "Anomaly report; scrub --raw internally");
    clean_group->require_option(1);
    nn->add_option("--window", nn_a.window, "Lagged inputs per sample")->check(CLI::PositiveNumber);
    nn->add_option("--hidden", nn_a.config.hidden, "Hidden units")->check(CLI::PositiveNumber);
    nn->add_option("--epochs", nn_a.config.epochs, "Maximum epochs")->check(CLI::PositiveNumber);
    nn->add_option("--lr", nn_a.config.learning_rate, "Learning rate")->check(CLI::PositiveNumber);
    nn->add_option("--patience", nn_a.config.patience, "Early-stopping patience")
        ->check(CLI::PositiveNumber);
    nn->add_option("--train-fraction", nn_a.config.train_fraction)->check(CLI::Range(0.0, 1.0));
    nn->add_option("--val-fraction", nn_a.config.val_fraction)->check(CLI::Range(0.0, 1.0));
    nn->add_option("--raw-curve", nn_a.raw_curve, "Training curve CSV for the raw model");
    nn->add_option("--clean-curve", nn_a.clean_curve, "Training curve CSV for the clean model");
    nn->add_option("--out", nn_a.out, "Summary CSV (default: stdout)");
    add_shared(nn, shared, true);
    nn->callback([&] { action = [&] { cmd_nn_compare(nn_a, shared, out); }; });

    AdfArgs adf_a;
    auto* adf = app.add_subcommand("adf", "Augmented Dickey-Fuller unit-root test");
    adf->add_option("--series", adf_a.series, "Series CSV")->required();
    adf->add_option("--lags", adf_a.lags, "Augmentation lags (default: Schwert rule)");
    adf->add_option("--diff", adf_a.diff, "Difference the series this many times first");
    adf->add_option("--table", adf_a.table, "Critical-value table (default: built in)");
    adf->add_option("--out", adf_a.out, "Result file (default: stdout)");
    add_shared(adf, shared, false);
    adf->callback([&] { action = [&] { cmd_adf(adf_a, out); }; });

    AdfTableArgs table_a;
    auto* table = app.add_subcommand("adf-table", "Simulate the Dickey-Fuller quantile table");
    table->add_option("--sizes", table_a.sizes, "Sample sizes")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
        ->delimiter(',');
    table->add_option("--replications", table_a.replications, "Replications per sample size");
    table->add_option("--table-seed", table_a.table_seed, "Simulation seed");
    table->add_option("--out", table_a.out, "Table file (default: stdout)");
    add_shared(table, shared, false);
    table->callback([&] { action = [&] { cmd_adf_table(table_a, shared, out); }; });

    CorrelogramArgs corr_a;
    auto* corr = app.add_subcommand("correlogram", "ACF and PACF with confidence bounds");
    corr->add_option("--series", corr_a.series, "Series CSV")->required();
    corr->add_option("--diff", corr_a.diff, "Difference the series this many times first");
    corr->add_option("--max-lag", corr_a.max_lag, "Largest lag")->check(CLI::PositiveNumber);
    corr->add_option("--acf-out", corr_a.acf_out, "ACF CSV");
    corr->add_option("--pacf-out", corr_a.pacf_out, "PACF CSV");
    add_shared(corr, shared, true);
    corr->callback([&] { action = [&] { cmd_correlogram(corr_a, shared, out, err); }; });

    FitArgs fit_a;
    auto* fitc = app.add_subcommand("fit", "Fit ARIMA on the training split and evaluate");
    fitc->add_option("--series", fit_a.series, "Series CSV")->required();
    fitc->add_option("--spec", fit_a.spec, "p,d,q (default: ADF and correlogram heuristics)");
    fitc->add_option("--train-fraction", fit_a.train_fraction)->check(CLI::Range(0.0, 1.0));
    fitc->add_option("--max-d", fit_a.max_d, "Largest d tried by the automatic order choice");
    fitc->add_option("--out", fit_a.out, "Model CSV (default: stdout)");
    fitc->add_option("--predictions", fit_a.predictions, "One-step test predictions CSV");
    add_shared(fitc, shared, false);
    fitc->callback([&] { action = [&] { cmd_fit(fit_a, out, err); }; });

    ForecastArgs fc_a;
    auto* fc = app.add_subcommand("forecast", "Forecast from a saved model or a given order");
    fc->add_option("--model", fc_a.model, "Model CSV written by fit");
    fc->add_option("--spec", fc_a.spec, "p,d,q to fit on the history instead of --model");
    fc->add_option("--series", fc_a.series, "Series CSV")->required();
    fc->add_option("--train-fraction", fc_a.train_fraction,
                   "Use only this leading share as history; the rest is actual")
        ->check(CLI::Range(0.0, 1.0));
    fc->add_option("--horizon", fc_a.horizon, "Steps ahead (multistep mode)")
        ->check(CLI::PositiveNumber);
    fc->add_option("--mode", fc_a.mode, "multistep|rolling");
    fc->add_option("--out", fc_a.out, "Forecast CSV (default: stdout)");
    add_shared(fc, shared, true);
    fc->callback([&] { action = [&] { cmd_forecast(fc_a, shared, out, err); }; });

    try {
        auto argv = expand_config(app, {args.begin(), args.end()});
        std::reverse(argv.begin(), argv.end());
        app.parse(argv);
        if (action) action();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
    } catch (const Error& e) {
        err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    }
}

}  // namespace cdrflow::cli
