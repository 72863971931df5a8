// umbra: training-free shadow detection/removal toolkit for remote-sensing
// images, with evaluation and benchmark subcommands.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "umbra/color.hpp"
#include "umbra/metrics.hpp"
#include "umbra/penumbra.hpp"
#include "umbra/pipeline.hpp"
#include "umbra/png_io.hpp"
#include "umbra/synth.hpp"

namespace fs = std::filesystem;
using namespace umbra;

namespace {

double now_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

struct ConfigState {
    std::string path;  // --config / UMBRA_CONFIG

    PipelineConfig base() const {
        if (!path.empty()) return load_config(path);
        return PipelineConfig{};
    }
};

// Flags shared by remove/bench that override the config file when present.
struct OverrideFlags {
    int neighbors = 7;
    int superpixel_size = 600;
    int penumbra_radius = 3;
    int threads = 1;
    bool no_smoothing = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--neighbors", neighbors, "Reference superpixels per shadow region");
        cmd->add_option("--superpixel-size", superpixel_size, "Target pixels per superpixel");
        cmd->add_option("--penumbra-radius", penumbra_radius,
                        "Dilation/erosion radius of the boundary band");
        cmd->add_option("--threads", threads, "Worker threads for the relighting stage");
        cmd->add_flag("--no-smoothing", no_smoothing, "Skip penumbra boundary smoothing");
    }

    void apply(const CLI::App* cmd, PipelineConfig& cfg) const {
        if (cmd->count("--neighbors")) cfg.relight.n_neighbors = neighbors;
        if (cmd->count("--superpixel-size")) cfg.relight.superpixel_size = superpixel_size;
        if (cmd->count("--penumbra-radius")) cfg.penumbra_radius = penumbra_radius;
        if (cmd->count("--threads")) cfg.threads = threads;
        if (no_smoothing) cfg.smoothing = false;
    }
};

std::vector<std::string> list_pngs(const std::string& dir) {
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir);
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".png")
            names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    return names;
}

bool is_companion(const std::string& name) {
    for (const char* suffix : {"_mask.png", "_truth.png", "_ann.png"})
        if (name.ends_with(suffix)) return true;
    return false;
}

ImageBuffer side_by_side(const ImageBuffer& a, const ImageBuffer& b) {
    const int gutter = 4;
    ImageBuffer out(a.width() + b.width() + gutter, a.height(), 3, 1.0f);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < a.height(); ++y) {
            for (int x = 0; x < a.width(); ++x) out.at(x, y, c) = a.at(x, y, c);
            for (int x = 0; x < b.width(); ++x)
                out.at(a.width() + gutter + x, y, c) = b.at(x, y, c);
        }
    return out;
}

void write_lines(const std::string& path, const std::string& content) {
    if (path.empty()) return;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << content;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---------------------------------------------------------------- subcommands

struct DetectCmd {
    std::string input, output;
    double value_percentile = 0.3, sat_min = 0.15;
    int min_component = 25;

    int run(const CLI::App* cmd, const ConfigState& conf) const {
        PipelineConfig cfg = conf.base();
        if (cmd->count("--value-percentile")) cfg.detect.value_percentile = value_percentile;
        if (cmd->count("--sat-min")) cfg.detect.sat_min = sat_min;
        if (cmd->count("--min-component")) cfg.detect.min_component = min_component;
        cfg.validate();
        ImageBuffer img = load_png(input);
        if (img.channels() != 3) throw DimensionError("detect: expected an RGB image");
        ShadowMask mask = detect_shadows(img, cfg.detect);
        save_mask(mask, output);
        double pct = 100.0 * static_cast<double>(mask.shadow_count()) /
                     static_cast<double>(mask.pixel_count());
        std::cout << "detect: " << mask.shadow_count() << " shadow pixels (" << std::fixed
                  << std::setprecision(2) << pct << "%) -> " << output << "\n";
        return 0;
    }
};

struct RemoveCmd {
    std::string input, mask_path, output, report_path, sbs_path;
    bool auto_detect = false;
    OverrideFlags over;

    int run(const CLI::App* cmd, const ConfigState& conf) const {
        if (mask_path.empty() == !auto_detect)
            throw ConfigError("remove: provide exactly one of --mask or --auto-detect");
        PipelineConfig cfg = conf.base();
        over.apply(cmd, cfg);
        cfg.validate();

        ImageBuffer img = load_png(input);
        if (img.channels() != 3) throw DimensionError("remove: expected an RGB image");
        ShadowMask mask = auto_detect ? detect_shadows(img, cfg.detect) : load_mask(mask_path);
        if (!mask.same_shape(img)) throw DimensionError("remove: image/mask size mismatch");

        double t0 = now_ms();
        RemovalResult res = run_pipeline(img, mask, cfg);
        double elapsed = now_ms() - t0;

        save_png(res.image, output);
        if (!report_path.empty()) {
            std::ofstream rep(report_path, std::ios::binary);
            if (!rep) throw IoError("cannot write " + report_path);
            write_report(res.report, rep);
        }
        if (!sbs_path.empty()) save_png(side_by_side(img, res.image), sbs_path);

        std::cout << "remove: " << res.report.records.size() << " shadow superpixels, "
                  << res.report.fallback_count << " fallbacks, duration_ms=" << std::fixed
                  << std::setprecision(1) << elapsed << " -> " << output << "\n";
        if (!res.report.diagnostic.empty())
            std::cout << "remove: warning: " << res.report.diagnostic << "\n";
        return 0;
    }
};

struct EvalMaskCmd {
    std::string pred_dir, gt_dir, out_path;

    int run() const {
        std::ostringstream lines;
        ConfusionCounts sum;
        size_t n = 0;
        for (const std::string& name : list_pngs(gt_dir)) {
            fs::path pred = fs::path(pred_dir) / name;
            if (!fs::exists(pred)) throw IoError("eval-mask: missing prediction " + pred.string());
            ShadowMask gm = load_mask((fs::path(gt_dir) / name).string());
            ShadowMask pm = load_mask(pred.string());
            if (!pm.same_shape(gm))
                throw DimensionError("eval-mask: size mismatch for " + name);
            ConfusionCounts c = confusion(pm, gm);
            DetectionMetrics m = detection_metrics(c);
            lines << "img " << name << " accuracy=" << m.accuracy << " recall=" << m.recall
                  << " f1=" << m.f1 << " ber=" << m.ber << " iou=" << m.iou << "\n";
            sum.tp += c.tp;
            sum.fp += c.fp;
            sum.tn += c.tn;
            sum.fn += c.fn;
            ++n;
        }
        if (n == 0) throw IoError("eval-mask: no ground-truth PNGs in " + gt_dir);
        DetectionMetrics agg = detection_metrics(sum);
        std::ostringstream table;
        table << std::fixed << std::setprecision(2);
        table << std::left << std::setw(12) << "accuracy" << agg.accuracy << "\n"
              << std::setw(12) << "recall" << agg.recall << "\n"
              << std::setw(12) << "f1" << agg.f1 << "\n"
              << std::setw(12) << "ber" << agg.ber << "\n"
              << std::setw(12) << "iou" << agg.iou << "\n";
        std::cout << lines.str() << table.str();
        write_lines(out_path, lines.str() + table.str());
        return 0;
    }
};

struct EvalRemovalCmd {
    std::string results_dir, ann_dir, out_path;

    int run() const {
        std::ostringstream lines;
        double sri_sum = 0, cd_sum = 0;
        size_t n = 0;
        for (const std::string& name : list_pngs(ann_dir)) {
            if (!name.ends_with("_ann.png")) continue;
            std::string base = name.substr(0, name.size() - 8);
            fs::path result = fs::path(results_dir) / (base + ".png");
            if (!fs::exists(result)) throw IoError("eval-removal: missing result " + result.string());
            RegionPairAnnotation ann = load_annotation((fs::path(ann_dir) / name).string());
            ImageBuffer img = load_png(result.string());
            double s = sri(img, ann), c = cd(img, ann);
            lines << "img " << base << " sri=" << s << " cd=" << c << "\n";
            sri_sum += s;
            cd_sum += c;
            ++n;
        }
        if (n == 0) throw IoError("eval-removal: no *_ann.png files in " + ann_dir);
        std::ostringstream table;
        table << std::fixed << std::setprecision(4);
        table << std::left << std::setw(12) << "sri" << sri_sum / n << "\n"
              << std::setw(12) << "cd" << cd_sum / n << "\n";
        std::cout << lines.str() << table.str();
        write_lines(out_path, lines.str() + table.str());
        return 0;
    }
};

struct BenchCmd {
    std::string dir, out_path, sweep;
    int repeats = 3;
    OverrideFlags over;

    struct CaseData {
        std::string stem;
        ImageBuffer img;
        ShadowMask mask;
        RegionPairAnnotation ann;
        bool has_ann = false;
        ImageBuffer truth;
        bool has_truth = false;
    };

    struct Aggregate {
        double mean_median_ms = 0, mean_sri = 0, mean_cd = 0, max_truth_err = 0;
        size_t ann_count = 0, truth_count = 0;
    };

    Aggregate run_suite(const std::vector<CaseData>& cases, const PipelineConfig& cfg,
                        std::ostringstream* lines) const {
        Aggregate agg;
        for (const CaseData& cd_ : cases) {
            std::vector<double> times;
            RemovalResult res;
            for (int r = 0; r < repeats; ++r) {
                double t0 = now_ms();
                res = run_pipeline(cd_.img, cd_.mask, cfg);
                times.push_back(now_ms() - t0);
            }
            double med = median(times);
            agg.mean_median_ms += med;
            double s = 0, c = 0, terr = 0;
            if (cd_.has_ann) {
                s = sri(res.image, cd_.ann);
                c = cd(res.image, cd_.ann);
                agg.mean_sri += s;
                agg.mean_cd += c;
                ++agg.ann_count;
            }
            if (cd_.has_truth) {
                // Max per-channel relative gap of umbra-interior means.
                ShadowMask interior = morph(cd_.mask, 4, MorphOp::Erode);
                auto il = interior.labels();
                for (int ch = 0; ch < 3; ++ch) {
                    auto rp = res.image.plane(ch);
                    auto tp = cd_.truth.plane(ch);
                    double rs = 0, ts = 0;
                    size_t cnt = 0;
                    for (size_t i = 0; i < il.size(); ++i)
                        if (il[i]) {
                            rs += rp[i];
                            ts += tp[i];
                            ++cnt;
                        }
                    if (cnt && ts > 0) terr = std::max(terr, std::abs(rs - ts) / ts);
                }
                agg.max_truth_err = std::max(agg.max_truth_err, terr);
                ++agg.truth_count;
            }
            if (lines) {
                *lines << "img " << cd_.stem << " median_ms=" << med;
                if (cd_.has_ann) *lines << " sri=" << s << " cd=" << c;
                if (cd_.has_truth) *lines << " truth_err=" << terr;
                *lines << "\n";
            }
        }
        agg.mean_median_ms /= static_cast<double>(cases.size());
        if (agg.ann_count) {
            agg.mean_sri /= static_cast<double>(agg.ann_count);
            agg.mean_cd /= static_cast<double>(agg.ann_count);
        }
        return agg;
    }

    int run(const CLI::App* cmd, const ConfigState& conf) const {
        if (repeats < 1) throw ConfigError("bench: repeats must be >= 1");
        PipelineConfig cfg = conf.base();
        over.apply(cmd, cfg);
        cfg.validate();

        std::vector<CaseData> cases;
        for (const std::string& name : list_pngs(dir)) {
            if (is_companion(name)) continue;
            CaseData c;
            c.stem = name.substr(0, name.size() - 4);
            fs::path base = fs::path(dir) / c.stem;
            fs::path mask = base.string() + "_mask.png";
            if (!fs::exists(mask)) continue;  // not a benchmark case
            c.img = load_png(base.string() + ".png");
            c.mask = load_mask(mask.string());
            if (fs::exists(base.string() + "_ann.png")) {
                c.ann = load_annotation(base.string() + "_ann.png");
                c.has_ann = true;
            }
            if (fs::exists(base.string() + "_truth.png")) {
                c.truth = load_png(base.string() + "_truth.png");
                c.has_truth = true;
            }
            cases.push_back(std::move(c));
        }
        if (cases.empty()) throw IoError("bench: no image/mask pairs in " + dir);

        std::ostringstream out;
        out << std::fixed << std::setprecision(4);
        if (sweep.empty()) {
            Aggregate agg = run_suite(cases, cfg, &out);
            out << "aggregate images=" << cases.size() << " mean_median_ms=" << agg.mean_median_ms;
            if (agg.ann_count) out << " sri=" << agg.mean_sri << " cd=" << agg.mean_cd;
            if (agg.truth_count) out << " max_truth_err=" << agg.max_truth_err;
            out << "\n";
        } else {
            for (int n : parse_sweep(sweep)) {
                PipelineConfig swept = cfg;
                swept.relight.n_neighbors = n;
                Aggregate agg = run_suite(cases, swept, nullptr);
                out << "sweep n=" << n << " sri=" << agg.mean_sri << " cd=" << agg.mean_cd
                    << " mean_median_ms=" << agg.mean_median_ms << "\n";
            }
        }
        std::cout << out.str();
        write_lines(out_path, out.str());
        return 0;
    }

    static std::vector<int> parse_sweep(const std::string& s) {
        std::vector<int> out;
        std::istringstream in(s);
        std::string tok;
        while (std::getline(in, tok, ',')) {
            try {
                size_t used = 0;
                int v = std::stoi(tok, &used);
                if (used != tok.size() || v < 1) throw std::invalid_argument(tok);
                out.push_back(v);
            } catch (const std::exception&) {
                throw ConfigError("bench: bad --sweep-neighbors entry '" + tok + "'");
            }
        }
        if (out.empty()) throw ConfigError("bench: empty --sweep-neighbors list");
        return out;
    }
};

struct SynthCmd {
    std::string out_dir;
    SynthParams params;

    int run() const {
        auto names = generate_synth_suite(params, out_dir);
        std::cout << "synth: wrote " << names.size() << " cases to " << out_dir << "\n";
        return 0;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"umbra: training-free shadow detection and removal for remote-sensing images"};
    app.require_subcommand(1);

    ConfigState conf;
    app.add_option("--config", conf.path, "key=value config file")
        ->envname("UMBRA_CONFIG");

    DetectCmd detect_cmd;
    CLI::App* detect_sub = app.add_subcommand("detect", "Threshold shadow detection");
    detect_sub->add_option("input", detect_cmd.input, "Input RGB PNG")->required();
    detect_sub->add_option("-o,--output", detect_cmd.output, "Output mask PNG")->required();
    detect_sub->add_option("--value-percentile", detect_cmd.value_percentile,
                           "V-channel quantile in (0,1)");
    detect_sub->add_option("--sat-min", detect_cmd.sat_min, "Saturation floor");
    detect_sub->add_option("--min-component", detect_cmd.min_component,
                           "Minimum connected component size");

    RemoveCmd remove_cmd;
    CLI::App* remove_sub = app.add_subcommand("remove", "Shadow removal");
    remove_sub->add_option("input", remove_cmd.input, "Input RGB PNG")->required();
    remove_sub->add_option("--mask", remove_cmd.mask_path, "Shadow mask PNG");
    remove_sub->add_flag("--auto-detect", remove_cmd.auto_detect,
                         "Detect the mask with the threshold detector");
    remove_sub->add_option("-o,--output", remove_cmd.output, "Output PNG")->required();
    remove_sub->add_option("--report", remove_cmd.report_path, "Per-superpixel relight report");
    remove_sub->add_option("--side-by-side", remove_cmd.sbs_path, "Before/after comparison PNG");
    remove_cmd.over.attach(remove_sub);

    EvalMaskCmd eval_mask_cmd;
    CLI::App* eval_mask_sub = app.add_subcommand("eval-mask", "Detection metrics over mask dirs");
    eval_mask_sub->add_option("--pred", eval_mask_cmd.pred_dir, "Predicted masks")->required();
    eval_mask_sub->add_option("--gt", eval_mask_cmd.gt_dir, "Ground-truth masks")->required();
    eval_mask_sub->add_option("-o,--output", eval_mask_cmd.out_path, "Write the table here too");

    EvalRemovalCmd eval_removal_cmd;
    CLI::App* eval_removal_sub =
        app.add_subcommand("eval-removal", "SRI/CD metrics over result dirs");
    eval_removal_sub->add_option("--results", eval_removal_cmd.results_dir, "Result images")
        ->required();
    eval_removal_sub
        ->add_option("--annotations", eval_removal_cmd.ann_dir, "Region-pair annotation PNGs")
        ->required();
    eval_removal_sub->add_option("-o,--output", eval_removal_cmd.out_path,
                                 "Write the table here too");

    BenchCmd bench_cmd;
    CLI::App* bench_sub = app.add_subcommand("bench", "Timing and quality benchmark");
    bench_sub->add_option("dir", bench_cmd.dir, "Directory of case PNGs with _mask companions")
        ->required();
    bench_sub->add_option("--repeats", bench_cmd.repeats, "Runs per image (median reported)");
    bench_sub->add_option("--sweep-neighbors", bench_cmd.sweep,
                          "Comma list of n values to sweep");
    bench_sub->add_option("-o,--output", bench_cmd.out_path, "Write the report here too");
    bench_cmd.over.attach(bench_sub);

    SynthCmd synth_cmd;
    CLI::App* synth_sub = app.add_subcommand("synth", "Generate synthetic shadow cases");
    synth_sub->add_option("out_dir", synth_cmd.out_dir, "Output directory")->required();
    synth_sub->add_option("--seed", synth_cmd.params.seed, "RNG seed");
    synth_sub->add_option("--count", synth_cmd.params.count, "Number of cases");
    synth_sub->add_option("--size", synth_cmd.params.size, "Image side length (multiple of 16)");

    try {
        app.parse(argc, argv);
        if (detect_sub->parsed()) return detect_cmd.run(detect_sub, conf);
        if (remove_sub->parsed()) return remove_cmd.run(remove_sub, conf);
        if (eval_mask_sub->parsed()) return eval_mask_cmd.run();
        if (eval_removal_sub->parsed()) return eval_removal_cmd.run();
        if (bench_sub->parsed()) return bench_cmd.run(bench_sub, conf);
        if (synth_sub->parsed()) return synth_cmd.run();
        return 0;
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 4;  // bad flags are config errors
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DimensionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
