#include "bravo/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "bravo/errors.hpp"
#include "bravo/fusion.hpp"
#include "bravo/version.hpp"

namespace bravo {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

void check_run_config(const RunConfig& config) {
  if (config.workers < 1)
    fail(ErrorKind::InvalidArgument, "worker count must be at least 1");
  if (config.ece_bins < 2)
    fail(ErrorKind::InvalidArgument, "calibration needs at least 2 bins");
}

std::vector<const ManifestSubset*> sorted_subsets(const Manifest& manifest) {
  std::vector<const ManifestSubset*> subsets;
  for (const auto& s : manifest.subsets) subsets.push_back(&s);
  std::sort(subsets.begin(), subsets.end(),
            [](const ManifestSubset* a, const ManifestSubset* b) {
              return subset_index(a->name) < subset_index(b->name);
            });
  return subsets;
}

std::vector<const ManifestItem*> sorted_items(const ManifestSubset& subset) {
  std::vector<const ManifestItem*> items;
  for (const auto& item : subset.items) items.push_back(&item);
  std::sort(items.begin(), items.end(),
            [](const ManifestItem* a, const ManifestItem* b) {
              return a->id < b->id;
            });
  return items;
}

/// Runs fn(0..count-1) on a bounded pool; fn must handle its own errors.
template <typename Fn>
void parallel_over(std::size_t count, int workers, Fn&& fn) {
  const int n = static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(workers), count));
  if (n <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(n);
  for (int w = 0; w < n; ++w) {
    pool.emplace_back([&next, count, &fn] {
      for (std::size_t i = next.fetch_add(1); i < count;
           i = next.fetch_add(1)) {
        fn(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

FusedPrediction fuse_item(const ManifestItem& item, int target_h, int target_w,
                          const ClassCatalog& catalog,
                          const std::optional<DecoderKind>& override) {
  if (!item.decoder)
    fail(ErrorKind::InvalidArgument, "item carries no decoder logits");
  if (override && *override != *item.decoder)
    fail(ErrorKind::ConfigMismatch,
         "item decoder '" + to_string(*item.decoder) +
             "' does not match the requested '" + to_string(*override) + "'");
  if (*item.decoder == DecoderKind::Linear) {
    LogitsTensor seg = read_tensor(*item.seg_logits, TensorKind::SegLogits);
    return linear_fuse(seg, target_h, target_w, catalog);
  }
  LogitsTensor mask = read_tensor(*item.mask_logits, TensorKind::MaskLogits);
  LogitsTensor cls = read_tensor(*item.class_logits, TensorKind::ClassLogits);
  return mask2former_fuse(mask, cls, target_h, target_w, catalog);
}

AccumulatorSet eval_item(const ManifestItem& item, const ClassCatalog& catalog,
                         const AccumulatorConfig& acc_config,
                         const std::optional<DecoderKind>& override) {
  ClassMap gt = read_class_map(item.gt, catalog);
  ValidityMask validity =
      item.validity ? read_validity_mask(*item.validity)
                    : ValidityMask::all_valid(gt.height(), gt.width());
  std::optional<ClassMap> pred;
  std::optional<ConfidenceMap> conf;
  if (item.fused()) {
    pred.emplace(read_class_map(*item.classes, catalog));
    conf.emplace(read_confidence_map(*item.confidence));
  } else {
    FusedPrediction fused =
        fuse_item(item, gt.height(), gt.width(), catalog, override);
    pred.emplace(std::move(fused.classes));
    conf.emplace(std::move(fused.confidence));
  }
  EvalUnit unit = validate_pair(*pred, *conf, gt, validity, catalog);
  AccumulatorSet acc(acc_config);
  accumulate(unit, acc);
  return acc;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t subset,
                       std::uint64_t item) {
  std::uint64_t x =
      seed + 0x9e3779b97f4a7c15ULL * (subset * 1000003ULL + item + 1);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

std::string item_name(const std::string& subset, int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "_%03d", index);
  return subset + buf;
}

std::string config_diff(const ReportConfig& a, const ReportConfig& b) {
  auto num = [](int v) { return std::to_string(v); };
  if (a.class_count != b.class_count)
    return "class_count " + num(a.class_count) + " vs " + num(b.class_count);
  if (a.ece_bins != b.ece_bins)
    return "ece_bins " + num(a.ece_bins) + " vs " + num(b.ece_bins);
  if (a.curve_bins != b.curve_bins)
    return "curve_bins " + num(a.curve_bins) + " vs " + num(b.curve_bins);
  if (a.policy != b.policy)
    return "degenerate_policy " + to_string(a.policy) + " vs " +
           to_string(b.policy);
  if (a.quantization != b.quantization)
    return "quantization " + a.quantization + " vs " + b.quantization;
  return "configs differ";
}

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
  return w >= width ? s : std::string(width - w, ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  std::size_t w = display_width(s);
  return w >= width ? s : s + std::string(width - w, ' ');
}

}  // namespace

EvalOutcome run_eval(const RunConfig& config) {
  check_run_config(config);
  const Manifest manifest = load_manifest(config.manifest);
  const ClassCatalog catalog(manifest.class_count);
  const AccumulatorConfig acc_config{manifest.class_count, config.ece_bins};

  struct Range {
    const ManifestSubset* subset;
    std::size_t begin;
    std::size_t end;
  };
  std::vector<const ManifestItem*> jobs;
  std::vector<Range> ranges;
  EvalOutcome outcome;
  for (const ManifestSubset* subset : sorted_subsets(manifest)) {
    auto items = sorted_items(*subset);
    if (items.empty()) {
      outcome.warnings.push_back("subset " + subset->name +
                                 " has no items and was omitted");
      continue;
    }
    const std::size_t begin = jobs.size();
    jobs.insert(jobs.end(), items.begin(), items.end());
    ranges.push_back({subset, begin, jobs.size()});
  }

  std::vector<std::optional<AccumulatorSet>> slots(jobs.size());
  std::vector<std::optional<ItemFailure>> errors(jobs.size());
  auto subset_of = [&ranges](std::size_t i) -> const std::string& {
    for (const auto& r : ranges)
      if (i >= r.begin && i < r.end) return r.subset->name;
    static const std::string none;
    return none;
  };
  parallel_over(jobs.size(), config.workers, [&](std::size_t i) {
    try {
      slots[i].emplace(
          eval_item(*jobs[i], catalog, acc_config, config.decoder_override));
    } catch (const Error& e) {
      errors[i] = ItemFailure{subset_of(i), jobs[i]->id, e.what()};
    } catch (const std::exception& e) {
      errors[i] = ItemFailure{subset_of(i), jobs[i]->id, e.what()};
    }
  });
  for (const auto& e : errors)
    if (e) outcome.failures.push_back(*e);

  std::vector<SubsetReport> subset_reports;
  for (const Range& range : ranges) {
    AccumulatorSet acc(acc_config);
    std::size_t used = 0;
    for (std::size_t i = range.begin; i < range.end; ++i) {
      if (!slots[i]) continue;
      acc.confusion.merge_from(slots[i]->confusion);
      acc.calibration.merge_from(slots[i]->calibration);
      acc.correctness.merge_from(slots[i]->correctness);
      acc.ood.merge_from(slots[i]->ood);
      ++used;
    }
    const std::string& name = range.subset->name;
    if (used == 0) {
      outcome.warnings.push_back("subset " + name +
                                 " produced no results and was omitted");
      continue;
    }
    try {
      SubsetReport report;
      report.name = name;
      if (subset_has_semantic(name))
        report.semantic = semantic_metrics(acc, config.policy);
      if (subset_has_ood(name)) report.ood = ood_metrics(acc, config.policy);
      subset_reports.push_back(std::move(report));
    } catch (const Error& e) {
      outcome.failures.push_back({name, "", e.what()});
    }
  }

  ReportConfig report_config;
  report_config.engine = kEngineVersion;
  report_config.class_count = manifest.class_count;
  report_config.ece_bins = config.ece_bins;
  report_config.curve_bins = CurveAccumulator::kBins;
  report_config.policy = config.policy;
  outcome.report = build_report(std::move(subset_reports), report_config);
  return outcome;
}

FuseOutcome run_fuse(const RunConfig& config) {
  check_run_config(config);
  if (config.out.empty())
    fail(ErrorKind::InvalidArgument, "fuse needs an output root");
  const Manifest manifest = load_manifest(config.manifest);
  const ClassCatalog catalog(manifest.class_count);
  const fs::path root = fs::absolute(config.out).lexically_normal();

  struct FuseJob {
    const ManifestSubset* subset;
    const ManifestItem* item;
    fs::path classes_path;
    fs::path confidence_path;
  };
  std::vector<FuseJob> jobs;
  std::vector<const ManifestSubset*> subsets = sorted_subsets(manifest);
  for (const ManifestSubset* subset : subsets) {
    for (const ManifestItem* item : sorted_items(*subset)) {
      jobs.push_back({subset, item,
                      root / subset->name / (item->id + "_classes.png"),
                      root / subset->name / (item->id + "_conf.png")});
    }
  }

  std::vector<std::optional<ManifestItem>> derived(jobs.size());
  std::vector<std::optional<ItemFailure>> errors(jobs.size());
  parallel_over(jobs.size(), config.workers, [&](std::size_t i) {
    const FuseJob& job = jobs[i];
    try {
      ClassMap gt = read_class_map(job.item->gt, catalog);
      FusedPrediction fused = fuse_item(*job.item, gt.height(), gt.width(),
                                        catalog, config.decoder_override);
      write_class_map(fused.classes, job.classes_path);
      write_confidence_map(fused.confidence, job.confidence_path);
      ManifestItem out;
      out.id = job.item->id;
      out.gt = job.item->gt;
      out.validity = job.item->validity;
      out.classes = job.classes_path;
      out.confidence = job.confidence_path;
      derived[i] = std::move(out);
    } catch (const Error& e) {
      errors[i] = ItemFailure{job.subset->name, job.item->id, e.what()};
    } catch (const std::exception& e) {
      errors[i] = ItemFailure{job.subset->name, job.item->id, e.what()};
    }
  });

  FuseOutcome outcome;
  Manifest out_manifest;
  out_manifest.class_count = manifest.class_count;
  out_manifest.root = root;
  for (const ManifestSubset* subset : subsets) {
    ManifestSubset derived_subset;
    derived_subset.name = subset->name;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      if (jobs[i].subset != subset) continue;
      if (errors[i]) {
        outcome.failures.push_back(*errors[i]);
      } else if (derived[i]) {
        derived_subset.items.push_back(*derived[i]);
        ++outcome.written;
      }
    }
    out_manifest.subsets.push_back(std::move(derived_subset));
  }
  outcome.manifest = root / "manifest.json";
  write_manifest(out_manifest, outcome.manifest);
  return outcome;
}

fs::path run_synth(const SynthConfig& config) {
  if (config.out.empty())
    fail(ErrorKind::InvalidArgument, "synth needs an output root");
  if (config.items_per_subset < 1)
    fail(ErrorKind::InvalidArgument, "need at least one item per subset");
  if (!(config.ood_invalid_fraction >= 0.0 &&
        config.ood_invalid_fraction <= 1.0))
    fail(ErrorKind::InvalidArgument,
         "ood invalid fraction " + std::to_string(config.ood_invalid_fraction) +
             " outside [0,1]");

  std::vector<std::string> names = config.subsets;
  if (names.empty())
    names.assign(kSubsetNames.begin(), kSubsetNames.end());
  for (const auto& name : names)
    if (!is_known_subset(name))
      fail(ErrorKind::InvalidArgument, "unknown subset name: " + name);
  std::sort(names.begin(), names.end(), [](const auto& a, const auto& b) {
    return subset_index(a) < subset_index(b);
  });
  if (std::adjacent_find(names.begin(), names.end()) != names.end())
    fail(ErrorKind::InvalidArgument, "subset listed twice");

  const fs::path root = fs::absolute(config.out).lexically_normal();
  Manifest manifest;
  manifest.class_count = config.spec.class_count;
  manifest.root = root;

  for (const std::string& name : names) {
    ManifestSubset subset;
    subset.name = name;
    FixtureSpec spec = config.spec;
    if (subset_has_ood(name))
      spec.invalid_fraction = config.ood_invalid_fraction;
    const fs::path dir = root / name;
    for (int k = 0; k < config.items_per_subset; ++k) {
      const std::string id = item_name(name, k);
      const std::uint64_t seed =
          mix_seed(config.seed, static_cast<std::uint64_t>(subset_index(name)),
                   static_cast<std::uint64_t>(k));
      Fixture fx = synth_fixture(spec, seed);

      ManifestItem item;
      item.id = id;
      item.gt = dir / (id + "_gt.png");
      write_class_map(fx.gt, item.gt);
      if (spec.invalid_fraction > 0.0) {
        item.validity = dir / (id + "_valid.png");
        write_validity_mask(fx.validity, *item.validity);
      }
      switch (config.logits) {
        case LogitsMode::None: {
          item.classes = dir / (id + "_classes.png");
          write_class_map(fx.pred, *item.classes);
          if (config.confidence_tensor) {
            item.confidence = dir / (id + "_conf.bten");
            write_confidence_tensor(fx.conf, *item.confidence);
          } else {
            item.confidence = dir / (id + "_conf.png");
            write_confidence_map(fx.conf, *item.confidence);
          }
          break;
        }
        case LogitsMode::Linear: {
          Rng logits_rng(seed ^ 0x5851f42d4c957f2dULL);
          const int lh = (spec.height + 1) / 2;
          const int lw = (spec.width + 1) / 2;
          std::vector<float> values(static_cast<std::size_t>(spec.class_count) *
                                    lh * lw);
          for (float& v : values)
            v = static_cast<float>(logits_rng.uniform_in(-4.0, 4.0));
          LogitsTensor seg(TensorKind::SegLogits, spec.class_count, lh, lw,
                           std::move(values));
          item.decoder = DecoderKind::Linear;
          item.seg_logits = dir / (id + "_seg.bten");
          write_tensor(seg, *item.seg_logits);
          break;
        }
        case LogitsMode::Mask2Former: {
          Rng logits_rng(seed ^ 0x5851f42d4c957f2dULL);
          const int masks = 4;
          const int lh = (spec.height + 1) / 2;
          const int lw = (spec.width + 1) / 2;
          std::vector<float> mask_values(static_cast<std::size_t>(masks) * lh *
                                         lw);
          for (float& v : mask_values)
            v = static_cast<float>(logits_rng.uniform_in(-4.0, 4.0));
          std::vector<float> class_values(
              static_cast<std::size_t>(masks) * (spec.class_count + 1));
          for (float& v : class_values)
            v = static_cast<float>(logits_rng.uniform_in(-4.0, 4.0));
          LogitsTensor mask(TensorKind::MaskLogits, masks, lh, lw,
                            std::move(mask_values));
          LogitsTensor cls(TensorKind::ClassLogits, masks, spec.class_count + 1,
                           1, std::move(class_values), 2);
          item.decoder = DecoderKind::Mask2Former;
          item.mask_logits = dir / (id + "_mask.bten");
          item.class_logits = dir / (id + "_cls.bten");
          write_tensor(mask, *item.mask_logits);
          write_tensor(cls, *item.class_logits);
          break;
        }
      }
      subset.items.push_back(std::move(item));
    }
    manifest.subsets.push_back(std::move(subset));
  }
  const fs::path manifest_path = root / "manifest.json";
  write_manifest(manifest, manifest_path);
  return manifest_path;
}

std::string run_summarize(const std::vector<fs::path>& reports,
                          ReportFormat format) {
  if (reports.empty())
    fail(ErrorKind::InvalidArgument, "summarize needs at least one report");
  std::vector<SummaryRow> rows;
  for (const fs::path& path : reports) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::IoFailure, "cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
      rows.push_back({path.string(), parse_report_json(buffer.str())});
    } catch (const Error& e) {
      fail(e.kind(), path.string() + ": " + e.what());
    }
  }
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (!rows[0].report.config.comparable_to(rows[i].report.config))
      fail(ErrorKind::ConfigMismatch,
           "reports are not comparable: " + rows[0].name + " and " +
               rows[i].name + " differ in " +
               config_diff(rows[0].report.config, rows[i].report.config));
  }
  auto key = [](const SummaryRow& row) {
    return row.report.bravo_index.ok
               ? row.report.bravo_index.value
               : -std::numeric_limits<double>::infinity();
  };
  std::stable_sort(rows.begin(), rows.end(),
                   [&key](const SummaryRow& a, const SummaryRow& b) {
                     return key(a) > key(b);
                   });

  if (format == ReportFormat::Json) {
    ordered_json out = ordered_json::array();
    for (const SummaryRow& row : rows) {
      auto value = [](const MetricValue& v) -> ordered_json {
        if (v.ok) return v.value;
        return ordered_json{{"degenerate", v.note}};
      };
      ordered_json entry;
      entry["name"] = row.name;
      entry["bravo_index"] = value(row.report.bravo_index);
      entry["semantic_summary"] = value(row.report.semantic_summary);
      entry["ood_summary"] = value(row.report.ood_summary);
      out.push_back(std::move(entry));
    }
    return out.dump(2) + "\n";
  }

  std::vector<std::string> notes;
  auto cell = [&notes](const MetricValue& v, const std::string& label) {
    char buf[32];
    if (v.ok) {
      std::snprintf(buf, sizeof buf, "%.1f", v.value);
      return std::string(buf);
    }
    notes.push_back(label + ": " + v.note);
    std::snprintf(buf, sizeof buf, "%s[%zu]", kDash, notes.size());
    return std::string(buf);
  };

  std::size_t name_w = 6;
  for (const SummaryRow& row : rows) name_w = std::max(name_w, row.name.size());
  const std::size_t col_w = 9;
  std::size_t sub_w[kSubsetNames.size()];
  for (std::size_t s = 0; s < kSubsetNames.size(); ++s)
    sub_w[s] = std::max<std::size_t>(col_w, kSubsetNames[s].size() + 2);

  std::ostringstream out;
  out << pad_right("report", name_w + 2) << pad_left("bravo", col_w)
      << pad_left("semantic", col_w) << pad_left("ood", col_w);
  for (std::size_t s = 0; s < kSubsetNames.size(); ++s)
    out << pad_left(std::string(kSubsetNames[s]), sub_w[s]);
  out << "\n";
  for (const SummaryRow& row : rows) {
    out << pad_right(row.name, name_w + 2)
        << pad_left(cell(row.report.bravo_index, row.name + " bravo"), col_w)
        << pad_left(cell(row.report.semantic_summary, row.name + " semantic"),
                    col_w)
        << pad_left(cell(row.report.ood_summary, row.name + " ood"), col_w);
    for (std::size_t s = 0; s < kSubsetNames.size(); ++s) {
      const auto it = std::find_if(
          row.report.subsets.begin(), row.report.subsets.end(),
          [&](const SubsetReport& sub) { return sub.name == kSubsetNames[s]; });
      if (it == row.report.subsets.end()) {
        out << pad_left("-", sub_w[s]);
      } else {
        out << pad_left(cell(it->harmonic_mean,
                             row.name + " " + std::string(kSubsetNames[s])),
                        sub_w[s]);
      }
    }
    out << "\n";
  }
  if (!notes.empty()) {
    out << "notes\n";
    for (std::size_t i = 0; i < notes.size(); ++i)
      out << "  [" << i + 1 << "] " << notes[i] << "\n";
  }
  return out.str();
}

}  // namespace bravo
