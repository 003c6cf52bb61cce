#include "xaibench/io.hpp"

#include <cstring>
#include <fstream>

#include "json.hpp"
#include "xaibench/error.hpp"

namespace xaibench::io {

namespace {

using nlohmann::json;

constexpr std::uint32_t kDatasetVersion = 1;
constexpr std::uint32_t kModelVersion = 1;
constexpr std::uint32_t kExplanationVersion = 1;

constexpr char kDatasetMagic[8] = {'X', 'A', 'I', 'B', 'D', 'A', 'T', '\0'};
constexpr char kModelMagic[8] = {'X', 'A', 'I', 'B', 'M', 'D', 'L', '\0'};
constexpr char kExplanationMagic[8] = {'X', 'A', 'I', 'B', 'E', 'X', 'P', '\0'};

struct ByteWriter {
    std::string buf;

    void bytes(const void* p, std::size_t n) {
        buf.append(static_cast<const char*>(p), n);
    }
    void u32(std::uint32_t v) {
        unsigned char b[4];
        for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
        bytes(b, 4);
    }
    void u64(std::uint64_t v) {
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
        bytes(b, 8);
    }
    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        u64(bits);
    }
    void header(const char magic[8], std::uint32_t version) {
        bytes(magic, 8);
        u32(version);
        u32(0); // reserved
    }
};

struct ByteReader {
    const std::string& buf;
    std::size_t pos = 0;

    void bytes(void* p, std::size_t n) {
        if (pos + n > buf.size()) fail(ErrorCode::format, "artifact file truncated");
        std::memcpy(p, buf.data() + pos, n);
        pos += n;
    }
    std::uint32_t u32() {
        unsigned char b[4];
        bytes(b, 4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        unsigned char b[8];
        bytes(b, 8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
        return v;
    }
    double f64() {
        std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    void header(const char magic[8], std::uint32_t version, const char* what) {
        char got[8];
        bytes(got, 8);
        if (std::memcmp(got, magic, 8) != 0)
            fail(ErrorCode::format, std::string(what) + ": bad magic, not the expected artifact");
        const std::uint32_t ver = u32();
        if (ver != version)
            fail(ErrorCode::format,
                 std::string(what) + ": unsupported version " + std::to_string(ver));
        u32(); // reserved
    }
    void done(const char* what) {
        if (pos != buf.size())
            fail(ErrorCode::format, std::string(what) + ": trailing bytes after payload");
    }
};

void write_f64_array(ByteWriter& w, const double* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) w.f64(p[i]);
}

void read_f64_array(ByteReader& r, double* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) p[i] = r.f64();
}

json roi_to_json(const RoiRect& roi) {
    return json{{"row0", roi.row0}, {"col0", roi.col0}, {"rows", roi.rows}, {"cols", roi.cols}};
}

RoiRect roi_from_json(const json& j) {
    RoiRect roi;
    roi.row0 = j.at("row0").get<std::size_t>();
    roi.col0 = j.at("col0").get<std::size_t>();
    roi.rows = j.at("rows").get<std::size_t>();
    roi.cols = j.at("cols").get<std::size_t>();
    return roi;
}

json parse_json_file(const std::filesystem::path& path, const char* what) {
    const std::string text = read_bytes(path);
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded())
        fail(ErrorCode::format, std::string(what) + ": sidecar is not valid JSON: " + path.string());
    return j;
}

} // namespace

void atomic_write_bytes(const std::filesystem::path& path, const std::string& bytes) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorCode::io, "cannot open for writing: " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) fail(ErrorCode::io, "write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) fail(ErrorCode::io, "rename failed: " + path.string() + ": " + ec.message());
}

void atomic_write_text(const std::filesystem::path& path, const std::string& text) {
    atomic_write_bytes(path, text);
}

std::string read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::io, "cannot open: " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) fail(ErrorCode::io, "read failed: " + path.string());
    return bytes;
}

void save_dataset(const std::filesystem::path& bin_path, const std::filesystem::path& json_path,
                  const Dataset& ds) {
    const auto& cfg = ds.config;
    ByteWriter w;
    w.header(kDatasetMagic, kDatasetVersion);
    w.u32(static_cast<std::uint32_t>(ds.samples()));
    w.u32(static_cast<std::uint32_t>(cfg.years));
    w.u32(static_cast<std::uint32_t>(cfg.grid_rows));
    w.u32(static_cast<std::uint32_t>(cfg.grid_cols));
    w.u32(static_cast<std::uint32_t>(cfg.classes));
    write_f64_array(w, ds.inputs.data(), ds.inputs.size());
    for (auto v : ds.year) w.u32(v);
    for (auto v : ds.label) w.u32(v);
    for (auto v : ds.member) w.u32(v);
    for (auto s : ds.split) w.buf.push_back(static_cast<char>(s));
    atomic_write_bytes(bin_path, w.buf);

    json j;
    j["config"] = {
        {"grid_rows", cfg.grid_rows},
        {"grid_cols", cfg.grid_cols},
        {"years", cfg.years},
        {"members", cfg.members},
        {"classes", cfg.classes},
        {"trend_amplitude", cfg.trend_amplitude},
        {"roi", roi_to_json(cfg.roi)},
        {"roi_signal", cfg.roi_signal},
        {"noise_sigma", cfg.noise_sigma},
        {"noise_smoothing", cfg.noise_smoothing},
        {"test_fraction", cfg.test_fraction},
        {"val_fraction", cfg.val_fraction},
        {"seed", cfg.seed},
    };
    std::size_t n_train = 0, n_val = 0, n_test = 0;
    for (auto s : ds.split) {
        if (s == Split::train) ++n_train;
        else if (s == Split::val) ++n_val;
        else ++n_test;
    }
    j["stats"] = {
        {"samples", ds.samples()},
        {"train", n_train},
        {"val", n_val},
        {"test", n_test},
        {"input_min", ds.input_min},
        {"input_max", ds.input_max},
    };
    atomic_write_text(json_path, j.dump(2) + "\n");
}

Dataset load_dataset(const std::filesystem::path& bin_path,
                     const std::filesystem::path& json_path) {
    const json j = parse_json_file(json_path, "dataset");
    DatasetConfig cfg;
    try {
        const json& c = j.at("config");
        cfg.grid_rows = c.at("grid_rows").get<std::size_t>();
        cfg.grid_cols = c.at("grid_cols").get<std::size_t>();
        cfg.years = c.at("years").get<std::size_t>();
        cfg.members = c.at("members").get<std::size_t>();
        cfg.classes = c.at("classes").get<std::size_t>();
        cfg.trend_amplitude = c.at("trend_amplitude").get<double>();
        cfg.roi = roi_from_json(c.at("roi"));
        cfg.roi_signal = c.at("roi_signal").get<double>();
        cfg.noise_sigma = c.at("noise_sigma").get<double>();
        cfg.noise_smoothing = c.at("noise_smoothing").get<std::size_t>();
        cfg.test_fraction = c.at("test_fraction").get<double>();
        cfg.val_fraction = c.at("val_fraction").get<double>();
        cfg.seed = c.at("seed").get<std::uint64_t>();
    } catch (const json::exception&) {
        fail(ErrorCode::format, "dataset: sidecar fields missing or mistyped");
    }

    const std::string bytes = read_bytes(bin_path);
    ByteReader r{bytes};
    r.header(kDatasetMagic, kDatasetVersion, "dataset");
    const std::size_t n = r.u32();
    const std::size_t years = r.u32();
    const std::size_t rows = r.u32();
    const std::size_t cols = r.u32();
    const std::size_t classes = r.u32();
    if (years != cfg.years || rows != cfg.grid_rows || cols != cfg.grid_cols ||
        classes != cfg.classes || n != cfg.sample_count()) {
        fail(ErrorCode::format, "dataset: binary dimensions disagree with the sidecar");
    }

    Dataset ds;
    ds.config = cfg;
    ds.inputs = Tensor({n, rows, cols});
    read_f64_array(r, ds.inputs.data(), ds.inputs.size());
    ds.year.resize(n);
    for (auto& v : ds.year) v = r.u32();
    ds.label.resize(n);
    for (auto& v : ds.label) v = r.u32();
    ds.member.resize(n);
    for (auto& v : ds.member) v = r.u32();
    ds.split.resize(n);
    for (auto& s : ds.split) {
        char b;
        r.bytes(&b, 1);
        if (b < 0 || b > 2) fail(ErrorCode::format, "dataset: invalid split tag");
        s = static_cast<Split>(b);
    }
    r.done("dataset");

    ds.central_year = class_central_years(cfg);
    ds.input_min = ds.inputs.size() ? ds.inputs.min() : 0.0;
    ds.input_max = ds.inputs.size() ? ds.inputs.max() : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (ds.label[i] >= cfg.classes || ds.year[i] >= cfg.years || ds.member[i] >= cfg.members)
            fail(ErrorCode::format, "dataset: sample annotation out of range");
    }
    return ds;
}

namespace {

json spec_to_json(const ModelSpec& spec) {
    json j;
    j["arch"] = spec.arch == ModelSpec::Arch::mlp ? "mlp" : "cnn";
    j["rows"] = spec.rows;
    j["cols"] = spec.cols;
    j["classes"] = spec.classes;
    j["hidden"] = spec.hidden;
    j["conv_channels"] = spec.conv_channels;
    j["conv_kernel"] = spec.conv_kernel;
    j["conv_stride"] = spec.conv_stride;
    j["pool"] = spec.pool;
    j["dense_width"] = spec.dense_width;
    j["dense_l2"] = spec.dense_l2;
    return j;
}

} // namespace

void save_model(const std::filesystem::path& bin_path, const std::filesystem::path& json_path,
                const Network& net, const ModelMeta& meta) {
    const ModelSpec& spec = net.spec();
    ByteWriter w;
    w.header(kModelMagic, kModelVersion);
    w.u32(spec.arch == ModelSpec::Arch::mlp ? 0u : 1u);
    w.u32(static_cast<std::uint32_t>(spec.rows));
    w.u32(static_cast<std::uint32_t>(spec.cols));
    w.u32(static_cast<std::uint32_t>(spec.classes));
    w.u32(static_cast<std::uint32_t>(spec.hidden.size()));
    for (auto h : spec.hidden) w.u32(static_cast<std::uint32_t>(h));
    w.u32(static_cast<std::uint32_t>(spec.conv_channels));
    w.u32(static_cast<std::uint32_t>(spec.conv_kernel));
    w.u32(static_cast<std::uint32_t>(spec.conv_stride));
    w.u32(static_cast<std::uint32_t>(spec.pool));
    w.u32(static_cast<std::uint32_t>(spec.dense_width));
    w.f64(spec.dense_l2);

    const auto& layers = net.layers();
    w.u32(static_cast<std::uint32_t>(layers.size()));
    for (const Layer& l : layers) {
        w.u32(static_cast<std::uint32_t>(l.kind));
        w.u64(l.weight.size());
        w.u64(l.bias.size());
    }
    for (const Layer& l : layers) {
        write_f64_array(w, l.weight.data(), l.weight.size());
        write_f64_array(w, l.bias.data(), l.bias.size());
    }
    atomic_write_bytes(bin_path, w.buf);

    json j;
    j["model"] = spec_to_json(net.spec());
    j["training"] = {
        {"train_seed", meta.train_seed},
        {"data_seed", meta.data_seed},
        {"best_epoch", meta.best_epoch},
        {"epochs_run", meta.epochs_run},
        {"val_loss", meta.val_loss},
        {"val_accuracy", meta.val_accuracy},
    };
    j["test"] = {
        {"accuracy", meta.test_accuracy},
        {"fuzzy_accuracy", meta.test_fuzzy_accuracy},
        {"rmse_years", meta.test_rmse_years},
    };
    atomic_write_text(json_path, j.dump(2) + "\n");
}

LoadedModel load_model(const std::filesystem::path& bin_path,
                       const std::filesystem::path& json_path) {
    const std::string bytes = read_bytes(bin_path);
    ByteReader r{bytes};
    r.header(kModelMagic, kModelVersion, "model");

    ModelSpec spec;
    spec.arch = r.u32() == 0 ? ModelSpec::Arch::mlp : ModelSpec::Arch::cnn;
    spec.rows = r.u32();
    spec.cols = r.u32();
    spec.classes = r.u32();
    spec.hidden.resize(r.u32());
    for (auto& h : spec.hidden) h = r.u32();
    spec.conv_channels = r.u32();
    spec.conv_kernel = r.u32();
    spec.conv_stride = r.u32();
    spec.pool = r.u32();
    spec.dense_width = r.u32();
    spec.dense_l2 = r.f64();

    Network net = Network::build(spec);
    auto& layers = net.layers();
    const std::size_t count = r.u32();
    if (count != layers.size())
        fail(ErrorCode::format, "model: layer table does not match the architecture");
    for (Layer& l : layers) {
        const auto kind = r.u32();
        const auto wsize = r.u64();
        const auto bsize = r.u64();
        if (kind != static_cast<std::uint32_t>(l.kind) || wsize != l.weight.size() ||
            bsize != l.bias.size()) {
            fail(ErrorCode::format, "model: layer table does not match the architecture");
        }
    }
    for (Layer& l : layers) {
        read_f64_array(r, l.weight.data(), l.weight.size());
        read_f64_array(r, l.bias.data(), l.bias.size());
    }
    r.done("model");

    LoadedModel out{std::move(net), {}};
    const json j = parse_json_file(json_path, "model");
    try {
        const json& t = j.at("training");
        out.meta.train_seed = t.at("train_seed").get<std::uint64_t>();
        out.meta.data_seed = t.at("data_seed").get<std::uint64_t>();
        out.meta.best_epoch = t.at("best_epoch").get<std::size_t>();
        out.meta.epochs_run = t.at("epochs_run").get<std::size_t>();
        out.meta.val_loss = t.at("val_loss").get<double>();
        out.meta.val_accuracy = t.at("val_accuracy").get<double>();
        const json& p = j.at("test");
        out.meta.test_accuracy = p.at("accuracy").get<double>();
        out.meta.test_fuzzy_accuracy = p.at("fuzzy_accuracy").get<double>();
        out.meta.test_rmse_years = p.at("rmse_years").get<double>();
    } catch (const json::exception&) {
        fail(ErrorCode::format, "model: sidecar fields missing or mistyped");
    }
    return out;
}

void save_explanations(const std::filesystem::path& bin_path,
                       const std::filesystem::path& json_path, const ExplanationBatch& batch,
                       const XaiConfig& cfg) {
    if (batch.maps.rank() != 3)
        fail(ErrorCode::shape, "explanation batch must be (N, rows, cols)");
    const std::size_t n = batch.maps.dim(0);
    if (batch.sample_ids.size() != n || batch.target_class.size() != n)
        fail(ErrorCode::shape, "explanation batch annotations do not match the map count");

    ByteWriter w;
    w.header(kExplanationMagic, kExplanationVersion);
    w.u32(static_cast<std::uint32_t>(batch.method));
    w.u32(static_cast<std::uint32_t>(n));
    w.u32(static_cast<std::uint32_t>(batch.maps.dim(1)));
    w.u32(static_cast<std::uint32_t>(batch.maps.dim(2)));
    w.u32(batch.normalized ? 1u : 0u);
    w.u64(batch.seed);
    for (auto v : batch.sample_ids) w.u32(v);
    for (auto v : batch.target_class) w.u32(v);
    write_f64_array(w, batch.maps.data(), batch.maps.size());
    atomic_write_bytes(bin_path, w.buf);

    json j;
    j["method"] = method_id(batch.method);
    j["seed"] = batch.seed;
    j["normalized"] = batch.normalized;
    j["samples"] = n;
    j["target_classes"] = batch.target_class;
    j["params"] = {
        {"sg_samples", cfg.sg_samples},
        {"sg_sigma_scale", cfg.sg_sigma_scale},
        {"ng_samples", cfg.ng_samples},
        {"ng_sigma", cfg.ng_sigma},
        {"fg_model_samples", cfg.fg_model_samples},
        {"fg_input_samples", cfg.fg_input_samples},
        {"fg_sigma_scale", cfg.fg_sigma_scale},
        {"fg_ng_sigma", cfg.fg_ng_sigma},
        {"ig_steps", cfg.ig_steps},
        {"ig_baseline", cfg.ig_baseline},
        {"lrp_alpha", cfg.lrp_alpha},
        {"lrp_beta", cfg.lrp_beta},
        {"lrp_epsilon", cfg.lrp_epsilon},
        {"lrp_gamma", cfg.lrp_gamma},
        {"base_method", method_id(cfg.base_method)},
    };
    atomic_write_text(json_path, j.dump(2) + "\n");
}

ExplanationBatch load_explanations(const std::filesystem::path& bin_path,
                                   const std::filesystem::path& json_path, XaiConfig* cfg_out) {
    const std::string bytes = read_bytes(bin_path);
    ByteReader r{bytes};
    r.header(kExplanationMagic, kExplanationVersion, "explanations");

    ExplanationBatch batch;
    const std::uint32_t mid = r.u32();
    auto m = method_from_index(mid);
    if (!m) fail(ErrorCode::format, "explanations: unknown method id " + std::to_string(mid));
    batch.method = *m;
    const std::size_t n = r.u32();
    const std::size_t rows = r.u32();
    const std::size_t cols = r.u32();
    batch.normalized = r.u32() != 0;
    batch.seed = r.u64();
    batch.sample_ids.resize(n);
    for (auto& v : batch.sample_ids) v = r.u32();
    batch.target_class.resize(n);
    for (auto& v : batch.target_class) v = r.u32();
    batch.maps = Tensor({n, rows, cols});
    read_f64_array(r, batch.maps.data(), batch.maps.size());
    r.done("explanations");

    if (cfg_out) {
        const json j = parse_json_file(json_path, "explanations");
        XaiConfig cfg;
        try {
            const json& p = j.at("params");
            cfg.sg_samples = p.at("sg_samples").get<std::size_t>();
            cfg.sg_sigma_scale = p.at("sg_sigma_scale").get<double>();
            cfg.ng_samples = p.at("ng_samples").get<std::size_t>();
            cfg.ng_sigma = p.at("ng_sigma").get<double>();
            cfg.fg_model_samples = p.at("fg_model_samples").get<std::size_t>();
            cfg.fg_input_samples = p.at("fg_input_samples").get<std::size_t>();
            cfg.fg_sigma_scale = p.at("fg_sigma_scale").get<double>();
            cfg.fg_ng_sigma = p.at("fg_ng_sigma").get<double>();
            cfg.ig_steps = p.at("ig_steps").get<std::size_t>();
            cfg.ig_baseline = p.at("ig_baseline").get<double>();
            cfg.lrp_alpha = p.at("lrp_alpha").get<double>();
            cfg.lrp_beta = p.at("lrp_beta").get<double>();
            cfg.lrp_epsilon = p.at("lrp_epsilon").get<double>();
            cfg.lrp_gamma = p.at("lrp_gamma").get<double>();
            auto bm = method_from_id(p.at("base_method").get<std::string>());
            if (!bm) fail(ErrorCode::format, "explanations: unknown base method");
            cfg.base_method = *bm;
        } catch (const json::exception&) {
            fail(ErrorCode::format, "explanations: sidecar fields missing or mistyped");
        }
        *cfg_out = cfg;
    }
    return batch;
}

} // namespace xaibench::io
