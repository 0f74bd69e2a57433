#include "hmimvc/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace hmimvc {

namespace {

constexpr char kMagic[4] = {'H', 'M', 'I', 'W'};
constexpr std::uint32_t kVersion = 1;

class Writer {
public:
    explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary) {
        if (!out_) throw ConfigError("cannot write checkpoint: " + path.string());
    }
    void u32(std::uint32_t v) { out_.write(reinterpret_cast<const char*>(&v), 4); }
    void u64(std::uint64_t v) { out_.write(reinterpret_cast<const char*>(&v), 8); }
    void f64(double v) { out_.write(reinterpret_cast<const char*>(&v), 8); }
    void byte(std::uint8_t v) { out_.write(reinterpret_cast<const char*>(&v), 1); }
    void doubles(const Vector& v) {
        u64(v.size());
        out_.write(reinterpret_cast<const char*>(v.data()),
                   static_cast<std::streamsize>(v.size() * 8));
    }
    void raw(const char* p, std::size_t n) { out_.write(p, static_cast<std::streamsize>(n)); }

private:
    std::ofstream out_;
};

class Reader {
public:
    explicit Reader(const std::filesystem::path& path) : in_(path, std::ios::binary), path_(path) {
        if (!in_) throw ConfigError("cannot open checkpoint: " + path.string());
    }
    std::uint32_t u32() {
        std::uint32_t v;
        read(&v, 4);
        return v;
    }
    std::uint64_t u64() {
        std::uint64_t v;
        read(&v, 8);
        return v;
    }
    double f64() {
        double v;
        read(&v, 8);
        return v;
    }
    std::uint8_t byte() {
        std::uint8_t v;
        read(&v, 1);
        return v;
    }
    Vector doubles() {
        const std::uint64_t n = u64();
        Vector v(n);
        read(v.data(), n * 8);
        return v;
    }
    void read(void* p, std::size_t n) {
        if (!in_.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n)))
            throw ConfigError("corrupt checkpoint (truncated): " + path_.string());
    }
    bool at_eof() {
        in_.peek();
        return in_.eof();
    }

private:
    std::ifstream in_;
    std::filesystem::path path_;
};

void write_mlp(Writer& w, const Mlp& mlp) {
    w.u32(static_cast<std::uint32_t>(mlp.layers.size()));
    for (const auto& l : mlp.layers) {
        w.u32(static_cast<std::uint32_t>(l.out_dim()));
        w.u32(static_cast<std::uint32_t>(l.in_dim()));
        w.byte(l.has_bn ? 1 : 0);
        w.byte(l.has_relu ? 1 : 0);
        w.doubles(l.weight.storage());
        w.doubles(l.bias);
        if (l.has_bn) {
            w.doubles(l.bn_gamma);
            w.doubles(l.bn_beta);
            w.doubles(l.bn_running_mean);
            w.doubles(l.bn_running_var);
        }
    }
}

Mlp read_mlp(Reader& r) {
    Mlp mlp;
    const std::uint32_t n_layers = r.u32();
    for (std::uint32_t li = 0; li < n_layers; ++li) {
        LayerParams l;
        const std::uint32_t out = r.u32();
        const std::uint32_t in = r.u32();
        l.has_bn = r.byte() != 0;
        l.has_relu = r.byte() != 0;
        Vector w = r.doubles();
        if (w.size() != static_cast<std::size_t>(out) * in)
            throw ConfigError("corrupt checkpoint: weight block size mismatch");
        l.weight = Matrix(out, in);
        l.weight.storage() = std::move(w);
        l.bias = r.doubles();
        if (l.bias.size() != out) throw ConfigError("corrupt checkpoint: bias size mismatch");
        if (l.has_bn) {
            l.bn_gamma = r.doubles();
            l.bn_beta = r.doubles();
            l.bn_running_mean = r.doubles();
            l.bn_running_var = r.doubles();
            if (l.bn_gamma.size() != out || l.bn_beta.size() != out ||
                l.bn_running_mean.size() != out || l.bn_running_var.size() != out)
                throw ConfigError("corrupt checkpoint: batch-norm block size mismatch");
        }
        mlp.layers.push_back(std::move(l));
    }
    return mlp;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    Writer w(path);
    w.raw(kMagic, 4);
    w.u32(kVersion);
    const auto& p = ckpt.params;
    w.u32(static_cast<std::uint32_t>(p.n_views()));
    w.u32(static_cast<std::uint32_t>(p.d_z));
    w.u32(static_cast<std::uint32_t>(p.view_dims.size()));
    for (index_t d : p.view_dims) w.u32(static_cast<std::uint32_t>(d));
    w.u32(static_cast<std::uint32_t>(p.hidden.size()));
    for (index_t h : p.hidden) w.u32(static_cast<std::uint32_t>(h));
    for (const auto& m : p.encoders) write_mlp(w, m);
    for (const auto& m : p.decoders) write_mlp(w, m);
    for (const auto& m : p.predictors) write_mlp(w, m);

    w.byte(ckpt.adam.has_value() ? 1 : 0);
    if (ckpt.adam) {
        w.u64(ckpt.adam->step);
        w.f64(ckpt.adam->lr);
        w.f64(ckpt.adam->beta1);
        w.f64(ckpt.adam->beta2);
        w.f64(ckpt.adam->eps);
        w.doubles(ckpt.adam->m);
        w.doubles(ckpt.adam->v);
    }
    w.byte(ckpt.tau.has_value() ? 1 : 0);
    if (ckpt.tau) {
        w.f64(ckpt.tau->tau);
        w.u64(ckpt.tau->n_p);
        w.u64(ckpt.tau->n_n);
    }
    w.byte(ckpt.progress.has_value() ? 1 : 0);
    if (ckpt.progress) {
        w.u32(static_cast<std::uint32_t>(ckpt.progress->stage));
        w.u64(ckpt.progress->epoch_in_stage);
    }
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    Reader r(path);
    char magic[4];
    r.read(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw ConfigError("not a checkpoint file (bad magic): " + path.string());
    const std::uint32_t version = r.u32();
    if (version != kVersion)
        throw ConfigError("checkpoint version " + std::to_string(version) +
                          " is not supported (expected " + std::to_string(kVersion) + ")");
    Checkpoint ckpt;
    auto& p = ckpt.params;
    const std::uint32_t n_views = r.u32();
    p.d_z = r.u32();
    const std::uint32_t n_dims = r.u32();
    for (std::uint32_t i = 0; i < n_dims; ++i) p.view_dims.push_back(r.u32());
    const std::uint32_t n_hidden = r.u32();
    for (std::uint32_t i = 0; i < n_hidden; ++i) p.hidden.push_back(r.u32());
    for (std::uint32_t v = 0; v < n_views; ++v) p.encoders.push_back(read_mlp(r));
    for (std::uint32_t v = 0; v < n_views; ++v) p.decoders.push_back(read_mlp(r));
    for (std::uint32_t v = 0; v < n_views; ++v) p.predictors.push_back(read_mlp(r));

    for (std::uint32_t v = 0; v < n_views; ++v) {
        if (p.encoders[v].in_dim() != p.view_dims[v] || p.encoders[v].out_dim() != p.d_z ||
            p.decoders[v].in_dim() != n_views * p.d_z ||
            p.decoders[v].out_dim() != p.view_dims[v] ||
            p.predictors[v].in_dim() != p.d_z || p.predictors[v].out_dim() != p.d_z)
            throw ConfigError("checkpoint architecture descriptor does not match its blocks: " +
                              path.string());
    }

    if (r.byte()) {
        AdamState adam;
        adam.step = r.u64();
        adam.lr = r.f64();
        adam.beta1 = r.f64();
        adam.beta2 = r.f64();
        adam.eps = r.f64();
        adam.m = r.doubles();
        adam.v = r.doubles();
        if (adam.m.size() != trainable_count(p) || adam.v.size() != adam.m.size())
            throw ConfigError("checkpoint optimizer state does not match the model");
        ckpt.adam = std::move(adam);
    }
    if (r.byte()) {
        Temperature t;
        t.tau = r.f64();
        t.n_p = r.u64();
        t.n_n = r.u64();
        ckpt.tau = t;
    }
    if (r.byte()) {
        TrainProgress prog;
        prog.stage = static_cast<int>(r.u32());
        prog.epoch_in_stage = r.u64();
        ckpt.progress = prog;
    }
    return ckpt;
}

void save_params(const ModelParams& params, const std::filesystem::path& path) {
    Checkpoint ckpt;
    ckpt.params = params;
    save_checkpoint(ckpt, path);
}

ModelParams load_params(const std::filesystem::path& path) {
    return load_checkpoint(path).params;
}

}  // namespace hmimvc
