#include "bravo/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "bravo/errors.hpp"
#include "bravo/types.hpp"

namespace bravo {
namespace {

using nlohmann::ordered_json;

MetricValue reversed_value(const MetricValue& v) {
  if (!v.ok) return v;
  return MetricValue::of(reverse_metric(v.value));
}

using NamedValues = std::vector<std::pair<std::string, MetricValue>>;

void append_semantic(NamedValues& out, const SemanticRecord& r) {
  out.emplace_back("miou", r.miou);
  out.emplace_back("auroc", r.auroc);
  out.emplace_back("aupr_success", r.aupr_success);
  out.emplace_back("aupr_error", r.aupr_error);
  out.emplace_back("ece(reversed)", reversed_value(r.ece));
  out.emplace_back("fpr95(reversed)", reversed_value(r.fpr95));
}

void append_ood(NamedValues& out, const OodRecord& r, const char* prefix) {
  out.emplace_back(std::string(prefix) + "auprc", r.auprc);
  out.emplace_back(std::string(prefix) + "auroc", r.auroc);
  out.emplace_back(std::string(prefix) + "fpr95(reversed)",
                   reversed_value(r.fpr95));
}

template <typename Record, typename Member, typename Get>
MetricValue average_field(const std::vector<SubsetReport>& subsets, Member member,
                          Get get) {
  double sum = 0.0;
  int n = 0;
  for (const auto& s : subsets) {
    const auto& record = s.*member;
    if (!record) continue;
    const MetricValue& v = get(*record);
    if (!v.ok) return MetricValue::degenerate(s.name + ": " + v.note);
    sum += v.value;
    ++n;
  }
  return MetricValue::of(sum / n);
}

ordered_json value_to_json(const MetricValue& v) {
  if (v.ok) return v.value;
  return ordered_json{{"degenerate", v.note}};
}

MetricValue value_from_json(const ordered_json& j, const std::string& where) {
  if (j.is_number()) return MetricValue::of(j.get<double>());
  if (j.is_object() && j.contains("degenerate") && j["degenerate"].is_string())
    return MetricValue::degenerate(j["degenerate"].get<std::string>());
  fail(ErrorKind::SchemaViolation,
       where + ": expected a number or a degenerate marker object");
}

const ordered_json& require_key(const ordered_json& j, const char* key,
                                const std::string& where) {
  if (!j.is_object() || !j.contains(key))
    fail(ErrorKind::SchemaViolation, where + ": missing key '" + key + "'");
  return j[key];
}

ordered_json semantic_to_json(const SemanticRecord& r) {
  ordered_json j;
  j["miou"] = value_to_json(r.miou);
  j["ece"] = value_to_json(r.ece);
  j["auroc"] = value_to_json(r.auroc);
  j["fpr95"] = value_to_json(r.fpr95);
  j["aupr_success"] = value_to_json(r.aupr_success);
  j["aupr_error"] = value_to_json(r.aupr_error);
  return j;
}

ordered_json ood_to_json(const OodRecord& r) {
  ordered_json j;
  j["auprc"] = value_to_json(r.auprc);
  j["auroc"] = value_to_json(r.auroc);
  j["fpr95"] = value_to_json(r.fpr95);
  return j;
}

SemanticRecord semantic_from_json(const ordered_json& j,
                                  const std::string& where) {
  SemanticRecord r;
  r.miou = value_from_json(require_key(j, "miou", where), where + "/miou");
  r.ece = value_from_json(require_key(j, "ece", where), where + "/ece");
  r.auroc = value_from_json(require_key(j, "auroc", where), where + "/auroc");
  r.fpr95 = value_from_json(require_key(j, "fpr95", where), where + "/fpr95");
  r.aupr_success = value_from_json(require_key(j, "aupr_success", where),
                                   where + "/aupr_success");
  r.aupr_error = value_from_json(require_key(j, "aupr_error", where),
                                 where + "/aupr_error");
  return r;
}

OodRecord ood_from_json(const ordered_json& j, const std::string& where) {
  OodRecord r;
  r.auprc = value_from_json(require_key(j, "auprc", where), where + "/auprc");
  r.auroc = value_from_json(require_key(j, "auroc", where), where + "/auroc");
  r.fpr95 = value_from_json(require_key(j, "fpr95", where), where + "/fpr95");
  return r;
}

// Text rendering keeps columns aligned; the degenerate dash is the only
// multi-byte glyph, so display width is byte length minus two per dash.
constexpr const char* kDash = "—";

std::size_t display_width(const std::string& s) {
  std::size_t glyphs = 0;
  std::size_t pos = 0;
  while ((pos = s.find(kDash, pos)) != std::string::npos) {
    ++glyphs;
    pos += 3;
  }
  return s.size() - 2 * glyphs;
}

std::string pad_left(const std::string& s, std::size_t width) {
  std::size_t w = display_width(s);
  if (w >= width) return s;
  return std::string(width - w, ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  std::size_t w = display_width(s);
  if (w >= width) return s;
  return s + std::string(width - w, ' ');
}

std::string cell(const MetricValue& v, const std::string& label,
                 std::vector<std::string>& notes) {
  char buf[32];
  if (v.ok) {
    std::snprintf(buf, sizeof buf, "%.1f", v.value);
    return buf;
  }
  notes.push_back(label + ": " + v.note);
  std::snprintf(buf, sizeof buf, "%s[%zu]", kDash, notes.size());
  return buf;
}

}  // namespace

MetricValue harmonic_mean(
    std::span<const std::pair<std::string, MetricValue>> values) {
  if (values.empty())
    fail(ErrorKind::InvalidArgument, "harmonic mean of an empty set");
  double inv_sum = 0.0;
  for (const auto& [name, v] : values) {
    if (!v.ok) return MetricValue::degenerate(name + ": " + v.note);
    if (v.value <= 0.0)
      return MetricValue::degenerate(name +
                                     " is not positive, harmonic mean undefined");
    inv_sum += 1.0 / v.value;
  }
  return MetricValue::of(static_cast<double>(values.size()) / inv_sum);
}

double reverse_metric(double value) {
  if (!(value >= 0.0 && value <= 100.0))
    fail(ErrorKind::InvalidArgument,
         "cannot reverse a metric outside [0, 100]: " + std::to_string(value));
  return 100.0 - value;
}

MetricValue semantic_summary(const SemanticRecord& record) {
  NamedValues values;
  append_semantic(values, record);
  return harmonic_mean(values);
}

MetricValue ood_summary(const OodRecord& record) {
  NamedValues values;
  append_ood(values, record, "");
  return harmonic_mean(values);
}

MetricValue bravo_index(const MetricValue& semantic, const MetricValue& ood) {
  NamedValues values{{"semantic summary", semantic}, {"ood summary", ood}};
  return harmonic_mean(values);
}

MetricValue subset_summary(const SubsetReport& subset) {
  NamedValues values;
  if (subset.semantic) append_semantic(values, *subset.semantic);
  if (subset.ood) append_ood(values, *subset.ood, subset.semantic ? "ood_" : "");
  if (values.empty())
    fail(ErrorKind::InvalidArgument,
         "subset " + subset.name + " carries no metrics");
  return harmonic_mean(values);
}

std::optional<SemanticRecord> averaged_semantic_record(
    const std::vector<SubsetReport>& subsets) {
  if (std::none_of(subsets.begin(), subsets.end(),
                   [](const SubsetReport& s) { return s.semantic.has_value(); }))
    return std::nullopt;
  auto avg = [&](MetricValue SemanticRecord::* field) {
    return average_field<SemanticRecord>(
        subsets, &SubsetReport::semantic,
        [field](const SemanticRecord& r) -> const MetricValue& {
          return r.*field;
        });
  };
  SemanticRecord r;
  r.miou = avg(&SemanticRecord::miou);
  r.ece = avg(&SemanticRecord::ece);
  r.auroc = avg(&SemanticRecord::auroc);
  r.fpr95 = avg(&SemanticRecord::fpr95);
  r.aupr_success = avg(&SemanticRecord::aupr_success);
  r.aupr_error = avg(&SemanticRecord::aupr_error);
  return r;
}

std::optional<OodRecord> averaged_ood_record(
    const std::vector<SubsetReport>& subsets) {
  if (std::none_of(subsets.begin(), subsets.end(),
                   [](const SubsetReport& s) { return s.ood.has_value(); }))
    return std::nullopt;
  auto avg = [&](MetricValue OodRecord::* field) {
    return average_field<OodRecord>(
        subsets, &SubsetReport::ood,
        [field](const OodRecord& r) -> const MetricValue& { return r.*field; });
  };
  OodRecord r;
  r.auprc = avg(&OodRecord::auprc);
  r.auroc = avg(&OodRecord::auroc);
  r.fpr95 = avg(&OodRecord::fpr95);
  return r;
}

BenchmarkReport build_report(std::vector<SubsetReport> subsets,
                             ReportConfig config) {
  for (auto& s : subsets) {
    if (!is_known_subset(s.name))
      fail(ErrorKind::InvalidArgument, "unknown subset name: " + s.name);
    s.harmonic_mean = subset_summary(s);
  }
  std::sort(subsets.begin(), subsets.end(),
            [](const SubsetReport& a, const SubsetReport& b) {
              return subset_index(a.name) < subset_index(b.name);
            });
  for (std::size_t i = 1; i < subsets.size(); ++i)
    if (subsets[i].name == subsets[i - 1].name)
      fail(ErrorKind::DuplicateId, "subset reported twice: " + subsets[i].name);

  BenchmarkReport report;
  report.config = std::move(config);
  auto semantic = averaged_semantic_record(subsets);
  auto ood = averaged_ood_record(subsets);
  report.semantic_summary =
      semantic ? semantic_summary(*semantic)
               : MetricValue::degenerate("no subset provides semantic metrics");
  report.ood_summary =
      ood ? ood_summary(*ood)
          : MetricValue::degenerate("no subset provides ood metrics");
  report.bravo_index = bravo_index(report.semantic_summary, report.ood_summary);
  report.subsets = std::move(subsets);
  return report;
}

std::string render_report(const BenchmarkReport& report, ReportFormat format) {
  return format == ReportFormat::Json ? render_report_json(report)
                                      : render_report_text(report);
}

std::string render_report_json(const BenchmarkReport& report) {
  ordered_json j;
  j["subsets"] = ordered_json::array();
  for (const auto& s : report.subsets) {
    ordered_json entry;
    entry["name"] = s.name;
    entry["semantic"] =
        s.semantic ? semantic_to_json(*s.semantic) : ordered_json(nullptr);
    entry["ood"] = s.ood ? ood_to_json(*s.ood) : ordered_json(nullptr);
    entry["harmonic_mean"] = value_to_json(s.harmonic_mean);
    j["subsets"].push_back(std::move(entry));
  }
  j["semantic_summary"] = value_to_json(report.semantic_summary);
  j["ood_summary"] = value_to_json(report.ood_summary);
  j["bravo_index"] = value_to_json(report.bravo_index);
  ordered_json cfg;
  cfg["engine"] = report.config.engine;
  cfg["class_count"] = report.config.class_count;
  cfg["ece_bins"] = report.config.ece_bins;
  cfg["curve_bins"] = report.config.curve_bins;
  cfg["degenerate_policy"] = to_string(report.config.policy);
  cfg["quantization"] = report.config.quantization;
  j["config"] = std::move(cfg);
  return j.dump(2) + "\n";
}

std::string render_report_text(const BenchmarkReport& report) {
  std::vector<std::string> notes;
  std::ostringstream out;
  const std::size_t name_w = 14;
  const std::size_t col_w = 9;

  out << "benchmark report (engine " << report.config.engine << ")\n";
  out << "config: classes=" << report.config.class_count
      << " ece-bins=" << report.config.ece_bins
      << " curve-bins=" << report.config.curve_bins
      << " policy=" << to_string(report.config.policy)
      << " quantization=" << report.config.quantization << "\n\n";

  out << "summary\n";
  out << "  " << pad_right("bravo index", name_w)
      << pad_left(cell(report.bravo_index, "bravo index", notes), col_w) << "\n";
  out << "  " << pad_right("semantic", name_w)
      << pad_left(cell(report.semantic_summary, "semantic summary", notes),
                  col_w)
      << "\n";
  out << "  " << pad_right("ood", name_w)
      << pad_left(cell(report.ood_summary, "ood summary", notes), col_w)
      << "\n\n";

  out << "subset harmonic means\n";
  for (const auto& s : report.subsets)
    out << "  " << pad_right(s.name, name_w)
        << pad_left(cell(s.harmonic_mean, s.name + " harmonic mean", notes),
                    col_w)
        << "\n";
  out << "\n";

  auto semantic_row = [&](const std::string& label, const SemanticRecord& r) {
    out << "  " << pad_right(label, name_w);
    const std::pair<const char*, const MetricValue&> cols[] = {
        {"miou", r.miou},           {"ece", r.ece},
        {"auroc", r.auroc},         {"fpr95", r.fpr95},
        {"aupr-s", r.aupr_success}, {"aupr-e", r.aupr_error}};
    for (const auto& [tag, v] : cols)
      out << pad_left(cell(v, label + " " + tag, notes), col_w);
    out << "\n";
  };
  if (auto avg = averaged_semantic_record(report.subsets)) {
    out << "semantic metrics\n  " << pad_right("subset", name_w);
    for (const char* h : {"miou", "ece", "auroc", "fpr95", "aupr-s", "aupr-e"})
      out << pad_left(h, col_w);
    out << "\n";
    for (const auto& s : report.subsets)
      if (s.semantic) semantic_row(s.name, *s.semantic);
    semantic_row("(average)", *avg);
    out << "\n";
  }

  auto ood_row = [&](const std::string& label, const OodRecord& r) {
    out << "  " << pad_right(label, name_w);
    const std::pair<const char*, const MetricValue&> cols[] = {
        {"auprc", r.auprc}, {"auroc", r.auroc}, {"fpr95", r.fpr95}};
    for (const auto& [tag, v] : cols)
      out << pad_left(cell(v, label + " " + tag, notes), col_w);
    out << "\n";
  };
  if (auto avg = averaged_ood_record(report.subsets)) {
    out << "ood metrics\n  " << pad_right("subset", name_w);
    for (const char* h : {"auprc", "auroc", "fpr95"}) out << pad_left(h, col_w);
    out << "\n";
    for (const auto& s : report.subsets)
      if (s.ood) ood_row(s.name, *s.ood);
    ood_row("(average)", *avg);
    out << "\n";
  }

  if (!notes.empty()) {
    out << "notes\n";
    for (std::size_t i = 0; i < notes.size(); ++i)
      out << "  [" << i + 1 << "] " << notes[i] << "\n";
  }
  return out.str();
}

BenchmarkReport parse_report_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::SchemaViolation, std::string("report is not valid json: ") +
                                         e.what());
  }
  BenchmarkReport report;
  const auto& subsets = require_key(j, "subsets", "report");
  if (!subsets.is_array())
    fail(ErrorKind::SchemaViolation, "report/subsets: expected an array");
  for (std::size_t i = 0; i < subsets.size(); ++i) {
    const auto& entry = subsets[i];
    const std::string where = "report/subsets/" + std::to_string(i);
    SubsetReport s;
    const auto& name = require_key(entry, "name", where);
    if (!name.is_string())
      fail(ErrorKind::SchemaViolation, where + "/name: expected a string");
    s.name = name.get<std::string>();
    const auto& semantic = require_key(entry, "semantic", where);
    if (!semantic.is_null())
      s.semantic = semantic_from_json(semantic, where + "/semantic");
    const auto& ood = require_key(entry, "ood", where);
    if (!ood.is_null()) s.ood = ood_from_json(ood, where + "/ood");
    s.harmonic_mean = value_from_json(require_key(entry, "harmonic_mean", where),
                                      where + "/harmonic_mean");
    report.subsets.push_back(std::move(s));
  }
  report.semantic_summary = value_from_json(
      require_key(j, "semantic_summary", "report"), "report/semantic_summary");
  report.ood_summary = value_from_json(require_key(j, "ood_summary", "report"),
                                       "report/ood_summary");
  report.bravo_index = value_from_json(require_key(j, "bravo_index", "report"),
                                       "report/bravo_index");
  const auto& cfg = require_key(j, "config", "report");
  const auto& engine = require_key(cfg, "engine", "report/config");
  if (!engine.is_string())
    fail(ErrorKind::SchemaViolation, "report/config/engine: expected a string");
  report.config.engine = engine.get<std::string>();
  auto read_int = [&](const char* key) {
    const auto& v = require_key(cfg, key, "report/config");
    if (!v.is_number_integer())
      fail(ErrorKind::SchemaViolation,
           std::string("report/config/") + key + ": expected an integer");
    return v.get<int>();
  };
  report.config.class_count = read_int("class_count");
  report.config.ece_bins = read_int("ece_bins");
  report.config.curve_bins = read_int("curve_bins");
  const auto& policy = require_key(cfg, "degenerate_policy", "report/config");
  if (!policy.is_string())
    fail(ErrorKind::SchemaViolation,
         "report/config/degenerate_policy: expected a string");
  report.config.policy = degenerate_policy_from_string(policy.get<std::string>());
  const auto& quant = require_key(cfg, "quantization", "report/config");
  if (!quant.is_string())
    fail(ErrorKind::SchemaViolation,
         "report/config/quantization: expected a string");
  report.config.quantization = quant.get<std::string>();
  return report;
}

}  // namespace bravo
