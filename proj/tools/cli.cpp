// Copyright 2026 The curvtopo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.hpp"

#include "curvtopo/error.hpp"
#include "curvtopo/losses.hpp"
#include "curvtopo/mask_io.hpp"
#include "curvtopo/persistence.hpp"
#include "curvtopo/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <mutex>
#include <sstream>
#include <thread>

namespace curvtopo::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

Connectivity parse_connectivity(int value) {
    if (value == 4) {
        return Connectivity::k4;
    }
    if (value == 8) {
        return Connectivity::k8;
    }
    throw UsageError("connectivity must be 4 or 8");
}

std::optional<int> parse_tile(const std::string& text) {
    if (text == "off") {
        return std::nullopt;
    }
    int tile = 0;
    std::istringstream in(text);
    if (!(in >> tile) || !in.eof() || tile < 1) {
        throw UsageError("--tile expects a positive size or 'off', got '" + text + "'");
    }
    return tile;
}

bool parse_resize(const std::string& text) {
    if (text == "source") {
        return true;
    }
    if (text == "none") {
        return false;
    }
    throw UsageError("--resize expects 'source' or 'none', got '" + text + "'");
}

std::string parse_format(const std::string& text) {
    if (text != "csv" && text != "json") {
        throw UsageError("--format expects csv or json, got '" + text + "'");
    }
    return text;
}

template <typename T>
void require(bool ok, const char* what, T value) {
    if (!ok) {
        std::ostringstream msg;
        msg << what << " (got " << value << ")";
        throw UsageError(msg.str());
    }
}

// Range checks shared by the config file and the flags.
void validate(const Settings& s) {
    require(s.rips.n_max >= 1, "n_max must be at least 1", s.rips.n_max);
    require(s.rips.max_dim == 1 || s.rips.max_dim == 2, "max_dim must be 1 or 2", s.rips.max_dim);
    if (s.rips.max_eps) {
        require(*s.rips.max_eps > 0.0, "max_eps must be positive", *s.rips.max_eps);
    }
    require(s.rips.simplex_budget >= 1, "simplex_budget must be positive", s.rips.simplex_budget);
    require(s.pi.grid_w >= 1 && s.pi.grid_h >= 1, "grid must be at least 1x1", s.pi.grid_w);
    if (s.pi.sigma) {
        require(*s.pi.sigma > 0.0, "sigma must be positive", *s.pi.sigma);
    }
    if (s.pi.weight_cap) {
        require(*s.pi.weight_cap > 0.0, "pmax must be positive", *s.pi.weight_cap);
    }
    require(s.threshold >= 0 && s.threshold <= 255, "threshold must be within 0..255", s.threshold);
    if (s.threads) {
        require(*s.threads >= 1, "threads must be at least 1", *s.threads);
    }
    if (s.metrics.tile) {
        require(*s.metrics.tile >= 1, "tile must be positive", *s.metrics.tile);
    }
}

} // namespace

void apply_config(Settings& s, std::string_view json_text) {
    Json j;
    try {
        j = Json::parse(json_text);
    } catch (const Json::parse_error& e) {
        throw UsageError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw UsageError("config must be a JSON object");
    }
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "n_max") {
                s.rips.n_max = v.get<Eigen::Index>();
            } else if (key == "strategy") {
                s.rips.strategy = parse_strategy(v.get<std::string>());
            } else if (key == "seed") {
                s.rips.seed = v.get<std::uint64_t>();
            } else if (key == "max_eps") {
                s.rips.max_eps = v.is_null() ? std::nullopt : std::optional(v.get<double>());
            } else if (key == "max_dim") {
                s.rips.max_dim = v.get<int>();
            } else if (key == "simplex_budget") {
                s.rips.simplex_budget = v.get<std::uint64_t>();
            } else if (key == "grid") {
                const auto grid = v.get<std::vector<int>>();
                if (grid.size() != 2) {
                    throw UsageError("config grid must be [width, height]");
                }
                s.pi.grid_w = grid[0];
                s.pi.grid_h = grid[1];
            } else if (key == "sigma") {
                s.pi.sigma = v.is_null() ? std::nullopt : std::optional(v.get<double>());
            } else if (key == "pmax") {
                s.pi.weight_cap = v.is_null() ? std::nullopt : std::optional(v.get<double>());
            } else if (key == "normalize") {
                s.pi.normalize = parse_normalization(v.get<std::string>());
            } else if (key == "dims") {
                s.dims = parse_dims(v.is_string() ? v.get<std::string>() : std::to_string(v.get<int>()));
            } else if (key == "resize") {
                s.resize_to_source = parse_resize(v.get<std::string>());
            } else if (key == "tile") {
                s.metrics.tile = v.is_string() ? parse_tile(v.get<std::string>())
                                               : std::optional(v.get<int>());
            } else if (key == "connectivity") {
                s.metrics.foreground = parse_connectivity(v.get<int>());
            } else if (key == "threshold") {
                s.threshold = v.get<int>();
            } else if (key == "threads") {
                s.threads = v.get<int>();
            } else if (key == "format") {
                s.format = parse_format(v.get<std::string>());
            } else {
                throw UsageError("unknown config key '" + key + "'");
            }
        }
    } catch (const Json::exception& e) {
        throw UsageError(std::string("bad config value: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    validate(s);
}

std::string pi_config_json(const Settings& s) {
    Json j;
    j["version"] = std::string(kVersion);
    j["n_max"] = s.rips.n_max;
    j["strategy"] = std::string(to_string(s.rips.strategy));
    j["seed"] = s.rips.seed;
    j["max_eps"] = s.rips.max_eps ? Json(*s.rips.max_eps) : Json(nullptr);
    j["max_dim"] = s.rips.max_dim;
    j["simplex_budget"] = s.rips.simplex_budget;
    j["grid"] = {s.pi.grid_w, s.pi.grid_h};
    j["sigma"] = s.pi.sigma ? Json(*s.pi.sigma) : Json(nullptr);
    j["pmax"] = s.pi.weight_cap ? Json(*s.pi.weight_cap) : Json(nullptr);
    j["normalize"] = std::string(to_string(s.pi.normalize));
    j["dims"] = std::string(to_string(s.dims));
    j["resize"] = s.resize_to_source ? "source" : "none";
    j["threshold"] = s.threshold;
    return j.dump();
}

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

int resolve_threads(std::optional<int> flag) {
    if (flag) {
        if (*flag < 1) {
            throw UsageError("threads must be at least 1, got " + std::to_string(*flag));
        }
        return *flag;
    }
    if (const char* env = std::getenv("CURVTOPO_THREADS"); env != nullptr && *env != '\0') {
        char* end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (*end != '\0' || n < 1) {
            throw UsageError(std::string("CURVTOPO_THREADS must be a positive integer, got '") + env + "'");
        }
        return static_cast<int>(n);
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "'");
    }
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const fs::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) {
        throw IoError("cannot write '" + path.string() + "'");
    }
}

// Runs body(i) for i in [0, n) on `threads` workers. body must not throw.
template <typename Body>
void parallel_for(std::size_t n, int threads, Body body) {
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                body(i);
            }
        });
    }
}

// Flags as given on the command line; unset ones leave the settings alone.
struct Flags {
    std::optional<std::string> config;
    std::optional<Eigen::Index> n_max;
    std::optional<std::string> strategy;
    std::optional<std::uint64_t> seed;
    std::optional<double> max_eps;
    std::optional<int> max_dim;
    std::optional<std::uint64_t> simplex_budget;
    std::vector<int> grid;
    std::optional<double> sigma;
    std::optional<double> pmax;
    std::optional<std::string> normalize;
    std::optional<std::string> dims;
    std::optional<std::string> resize;
    std::optional<std::string> tile;
    std::optional<int> connectivity;
    std::optional<int> threshold;
    std::optional<int> threads;
    std::optional<std::string> format;
};

void add_common(CLI::App& cmd, Flags& f) {
    cmd.add_option("--config", f.config, "JSON file with default options (flags win)");
    cmd.add_option("--threshold", f.threshold, "gray level at or above which a pixel is foreground [128]");
}

void add_rips(CLI::App& cmd, Flags& f) {
    cmd.add_option("--n-max", f.n_max, "subsample size [400]");
    cmd.add_option("--strategy", f.strategy, "subsampling: uniform or maxmin [maxmin]");
    cmd.add_option("--seed", f.seed, "subsampling seed [0]");
    cmd.add_option("--max-eps", f.max_eps, "filtration cap [diameter of the sample]");
    cmd.add_option("--max-dim", f.max_dim, "highest simplex dimension, 1 or 2 [2]");
    cmd.add_option("--simplex-budget", f.simplex_budget, "largest complex allowed [16777216]");
}

void add_pi(CLI::App& cmd, Flags& f) {
    cmd.add_option("--grid", f.grid, "PI grid width and height [64 64]")->expected(2);
    cmd.add_option("--sigma", f.sigma, "Gaussian deviation [max_eps/20]");
    cmd.add_option("--pmax", f.pmax, "persistence at full weight [max_eps/2]");
    cmd.add_option("--normalize", f.normalize, "none or max1 [max1]");
    cmd.add_option("--dims", f.dims, "homology dimensions: 0, 1 or 01 [1]");
    cmd.add_option("--resize", f.resize, "source (PI resampled to the mask size) or none [source]");
}

void add_workers(CLI::App& cmd, Flags& f) {
    cmd.add_option("--threads", f.threads, "worker threads [CURVTOPO_THREADS or all cores]");
}

Settings resolve_settings(const Flags& f) {
    Settings s;
    if (f.config) {
        std::string text;
        try {
            text = read_file(*f.config);
        } catch (const IoError& e) {
            throw UsageError(e.what());
        }
        apply_config(s, text);
    }
    try {
        if (f.n_max) s.rips.n_max = *f.n_max;
        if (f.strategy) s.rips.strategy = parse_strategy(*f.strategy);
        if (f.seed) s.rips.seed = *f.seed;
        if (f.max_eps) s.rips.max_eps = *f.max_eps;
        if (f.max_dim) s.rips.max_dim = *f.max_dim;
        if (f.simplex_budget) s.rips.simplex_budget = *f.simplex_budget;
        if (!f.grid.empty()) {
            s.pi.grid_w = f.grid[0];
            s.pi.grid_h = f.grid[1];
        }
        if (f.sigma) s.pi.sigma = *f.sigma;
        if (f.pmax) s.pi.weight_cap = *f.pmax;
        if (f.normalize) s.pi.normalize = parse_normalization(*f.normalize);
        if (f.dims) s.dims = parse_dims(*f.dims);
        if (f.resize) s.resize_to_source = parse_resize(*f.resize);
        if (f.tile) s.metrics.tile = parse_tile(*f.tile);
        if (f.connectivity) s.metrics.foreground = parse_connectivity(*f.connectivity);
        if (f.threshold) s.threshold = *f.threshold;
        if (f.threads) s.threads = *f.threads;
        if (f.format) s.format = parse_format(*f.format);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    validate(s);
    return s;
}

MaskLoadOptions load_options(const Settings& s) {
    MaskLoadOptions o;
    o.threshold = s.threshold;
    return o;
}

// ---------------------------------------------------------------------------

int cmd_pd(const fs::path& mask_path, const fs::path& out_path, const Settings& s,
           std::ostream& out) {
    const BinaryMask mask = load_mask(mask_path, load_options(s));
    const MaskDiagram md = mask_to_diagram(mask, s.rips);
    save_diagram(md.diagram, out_path);
    const auto& d = md.diagram;
    std::size_t essential = 0;
    std::size_t capped = 0;
    for (const auto& p : d.pairs) {
        essential += p.essential() ? 1 : 0;
        capped += p.capped ? 1 : 0;
    }
    out << "dim 0: " << d.count(0) << " pairs\n"
        << "dim 1: " << d.count(1) << " pairs (" << capped << " capped)\n"
        << "essential: " << essential << ", max_eps " << md.max_eps << ", points " << md.points
        << ", sampled " << md.sampled << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct PiJob {
    fs::path input;
    fs::path raster;
    fs::path diagram;
    fs::path sidecar;
};

PiJob pi_job(const fs::path& input, const fs::path& out_dir) {
    const std::string stem = input.stem().string();
    return {input, out_dir / (stem + ".pir"), out_dir / (stem + ".pd.json"),
            out_dir / (stem + ".pir.json")};
}

bool up_to_date(const PiJob& job, const std::string& config_hash, const std::string& input_hash) {
    if (!fs::exists(job.sidecar) || !fs::exists(job.raster) || !fs::exists(job.diagram)) {
        return false;
    }
    try {
        const Json j = Json::parse(read_file(job.sidecar));
        return j.at("config_hash") == config_hash && j.at("input_hash") == input_hash;
    } catch (const std::exception&) {
        return false;
    }
}

// The sidecar is written last, so its presence marks a finished output.
void generate(const PiJob& job, const Settings& s, const std::string& config_text,
              const std::string& config_hash, const std::string& input_hash) {
    const BinaryMask mask = load_mask(job.input, load_options(s));
    const PiPipelineResult r = mask_to_pi(mask, s.rips, s.pi, s.dims);
    RasterF32 raster = to_raster_f32(r.image);
    if (s.resize_to_source) {
        raster = resize_pi(raster, mask.height(), mask.width());
    }
    save_raster(raster, job.raster);
    save_diagram(r.diagram, job.diagram);

    const PiConfig& c = r.image.config;
    Json side;
    side["version"] = std::string(kVersion);
    side["input"] = job.input.filename().string();
    side["input_hash"] = input_hash;
    side["config"] = Json::parse(config_text);
    side["config_hash"] = config_hash;
    side["resolved"] = {{"max_eps", r.max_eps},
                        {"grid", {c.grid_w, c.grid_h}},
                        {"birth_range", {c.birth_lo, c.birth_hi}},
                        {"pers_range", {c.pers_lo, c.pers_hi}},
                        {"sigma", c.sigma},
                        {"pmax", c.weight_cap},
                        {"normalize", std::string(to_string(c.normalize))}};
    side["raster"] = {{"path", job.raster.filename().string()},
                      {"width", raster.cols()},
                      {"height", raster.rows()}};
    side["diagram"] = job.diagram.filename().string();
    side["points"] = r.points;
    side["sampled"] = r.sampled;
    write_file(job.sidecar, side.dump(2) + "\n");
}

int cmd_pi_gen(const fs::path& in_dir, const fs::path& out_dir, const Settings& s,
               std::ostream& out, std::ostream& err) {
    const auto start = std::chrono::steady_clock::now();
    if (!fs::is_directory(in_dir)) {
        throw UsageError("input directory '" + in_dir.string() + "' does not exist");
    }
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir)) {
        throw UsageError("cannot create output directory '" + out_dir.string() + "'");
    }
    const auto inputs = list_mask_files(in_dir);
    const std::string config_text = pi_config_json(s);
    const std::string config_hash = fnv1a_hex(config_text);

    enum class Outcome { kGenerated, kSkipped, kFailed };
    std::vector<Outcome> outcomes(inputs.size(), Outcome::kFailed);
    std::vector<std::string> errors(inputs.size());
    parallel_for(inputs.size(), resolve_threads(s.threads), [&](std::size_t i) {
        const PiJob job = pi_job(inputs[i], out_dir);
        try {
            const std::string input_hash = fnv1a_hex(read_file(job.input));
            if (up_to_date(job, config_hash, input_hash)) {
                outcomes[i] = Outcome::kSkipped;
                return;
            }
            generate(job, s, config_text, config_hash, input_hash);
            outcomes[i] = Outcome::kGenerated;
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });

    std::size_t generated = 0, skipped = 0, failed = 0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        switch (outcomes[i]) {
        case Outcome::kGenerated: ++generated; break;
        case Outcome::kSkipped: ++skipped; break;
        case Outcome::kFailed:
            ++failed;
            err << "error: " << inputs[i].string() << ": " << errors[i] << "\n";
            break;
        }
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    char wall[32];
    std::snprintf(wall, sizeof wall, "%.2f", seconds);
    out << "pi-gen: " << inputs.size() << " masks, " << generated << " generated, " << skipped
        << " skipped, " << failed << " failed in " << wall << " s\n";
    return failed > 0 ? kExitPartial : kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_eval(const fs::path& pred_dir, const fs::path& gt_dir, const std::optional<fs::path>& out_path,
             const Settings& s, std::ostream& out, std::ostream& err) {
    const DirectoryPairing pairing = pair_directories(pred_dir, gt_dir);
    for (const auto& stem : pairing.unmatched_pred) {
        err << "warning: '" << stem << "' has no ground truth in " << gt_dir.string() << "\n";
    }
    for (const auto& stem : pairing.unmatched_gt) {
        err << "warning: '" << stem << "' has no prediction in " << pred_dir.string() << "\n";
    }

    std::string format = s.format;
    if (format.empty()) {
        format = out_path && out_path->extension() == ".json" ? "json" : "csv";
    }

    std::vector<MetricsRow> rows(pairing.pairs.size());
    parallel_for(rows.size(), resolve_threads(s.threads), [&](std::size_t i) {
        const auto& [pred_path, gt_path] = pairing.pairs[i];
        try {
            const BinaryMask pred = load_mask(pred_path, load_options(s));
            const BinaryMask gt = load_mask(gt_path, load_options(s));
            rows[i] = evaluate_pair(pred, gt, s.metrics);
        } catch (const std::exception& e) {
            rows[i] = MetricsRow{};
            rows[i].error = e.what();
        }
        rows[i].file = pred_path.filename().string();
    });

    const MetricsReport report = aggregate(std::move(rows), s.metrics);
    for (const auto& row : report.rows) {
        if (!row.ok()) {
            err << "error: " << row.file << ": " << row.error << "\n";
        }
    }
    const std::string text = format == "json" ? report_to_json(report) : report_to_csv(report);
    if (out_path) {
        write_file(*out_path, text);
        out << "eval: " << report.evaluated << " evaluated, " << report.failed << " failed, betti "
            << report.betti_mode << " -> " << out_path->string() << "\n";
    } else {
        out << text;
    }
    return report.failed > 0 ? kExitPartial : kExitOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Persistence diagrams, persistence images and topology-aware metrics for "
                 "binary segmentation masks.",
                 "curvtopo"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    Flags f;
    std::string mask_path, in_dir, out_dir, pred_dir, gt_dir;
    std::optional<std::string> out_file;

    CLI::App* pd = app.add_subcommand("pd", "write the persistence diagram of one mask");
    pd->add_option("mask", mask_path, "mask image (PNG or PGM)")->required();
    pd->add_option("-o,--out", out_file, "diagram JSON path")->required();
    add_common(*pd, f);
    add_rips(*pd, f);

    CLI::App* pi = app.add_subcommand("pi-gen", "write a persistence image for every mask in a directory");
    pi->add_option("masks", in_dir, "directory of masks")->required();
    pi->add_option("out", out_dir, "output directory")->required();
    add_common(*pi, f);
    add_rips(*pi, f);
    add_pi(*pi, f);
    add_workers(*pi, f);

    CLI::App* ev = app.add_subcommand("eval", "score predictions against ground truth");
    ev->add_option("pred", pred_dir, "directory of predicted masks")->required();
    ev->add_option("gt", gt_dir, "directory of ground-truth masks")->required();
    ev->add_option("-o,--out", out_file, "report path [stdout]");
    ev->add_option("--format", f.format, "csv or json [from the extension, else csv]");
    ev->add_option("--tile", f.tile, "Betti error tile size, or off for whole images [off]");
    ev->add_option("--connectivity", f.connectivity, "foreground connectivity, 4 or 8 [8]");
    add_common(*ev, f);
    add_workers(*ev, f);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        const Settings s = resolve_settings(f);
        if (pd->parsed()) {
            return cmd_pd(mask_path, *out_file, s, out);
        }
        if (pi->parsed()) {
            return cmd_pi_gen(in_dir, out_dir, s, out, err);
        }
        return cmd_eval(pred_dir, gt_dir, out_file ? std::optional<fs::path>(*out_file) : std::nullopt,
                        s, out, err);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitPartial;
    }
}

} // namespace curvtopo::cli
