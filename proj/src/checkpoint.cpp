#include "flopsd/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "flopsd/errors.hpp"
#include "flopsd/hash.hpp"

namespace flopsd {

namespace {

constexpr char kMagic[] = "FLOPSD1";
constexpr size_t kMagicLen = 7;

void put_u32(std::vector<unsigned char>& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_f64(std::vector<unsigned char>& out, double d) {
    uint64_t v;
    std::memcpy(&v, &d, 8);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

class Reader {
  public:
    Reader(const std::vector<unsigned char>& bytes) : bytes_(bytes) {}

    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }

    uint8_t u8() {
        need(1);
        return bytes_[pos_++];
    }

    double f64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 8;
        double d;
        std::memcpy(&d, &v, 8);
        return d;
    }

    void expect_magic() {
        need(kMagicLen);
        if (std::memcmp(bytes_.data(), kMagic, kMagicLen) != 0) {
            throw UsageError("checkpoint: bad magic (not a FLOPSD1 file)");
        }
        pos_ += kMagicLen;
    }

    size_t remaining() const { return bytes_.size() - pos_; }

  private:
    void need(size_t n) {
        if (pos_ + n > bytes_.size()) throw UsageError("checkpoint: truncated file");
    }
    const std::vector<unsigned char>& bytes_;
    size_t pos_ = 0;
};

}  // namespace

std::vector<unsigned char> serialize_checkpoint(const NetSpec& spec, const ParamVector& params) {
    spec.validate();
    if (static_cast<int>(params.size()) != param_count(spec)) {
        throw std::invalid_argument("serialize_checkpoint: param count mismatch");
    }
    std::vector<unsigned char> out;
    out.reserve(kMagicLen + 5 + 4 * spec.layer_sizes.size() + 8 * params.size());
    out.insert(out.end(), kMagic, kMagic + kMagicLen);
    put_u32(out, static_cast<uint32_t>(spec.layer_sizes.size()));
    for (int n : spec.layer_sizes) put_u32(out, static_cast<uint32_t>(n));
    out.push_back(spec.activation == Activation::kTanh ? 0 : 1);
    for (double p : params) put_f64(out, p);
    return out;
}

Checkpoint deserialize_checkpoint(const std::vector<unsigned char>& bytes) {
    Reader r(bytes);
    r.expect_magic();
    uint32_t n_layers = r.u32();
    if (n_layers < 3 || n_layers > 64) throw UsageError("checkpoint: implausible layer count");
    Checkpoint ckpt;
    ckpt.spec.layer_sizes.resize(n_layers);
    for (uint32_t i = 0; i < n_layers; ++i) {
        ckpt.spec.layer_sizes[i] = static_cast<int>(r.u32());
    }
    uint8_t tag = r.u8();
    if (tag > 1) throw UsageError("checkpoint: unknown activation tag");
    ckpt.spec.activation = tag == 0 ? Activation::kTanh : Activation::kSilu;
    ckpt.spec.validate();
    const int n_params = param_count(ckpt.spec);
    if (r.remaining() != static_cast<size_t>(n_params) * 8) {
        throw UsageError("checkpoint: parameter payload size mismatch");
    }
    ckpt.params.resize(n_params);
    for (int i = 0; i < n_params; ++i) ckpt.params[i] = r.f64();
    return ckpt;
}

void save_checkpoint(const std::string& path, const NetSpec& spec, const ParamVector& params) {
    auto bytes = serialize_checkpoint(spec, params);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw UsageError("cannot open checkpoint for writing: " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw UsageError("short write on checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw UsageError("missing checkpoint: " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                     std::istreambuf_iterator<char>());
    return deserialize_checkpoint(bytes);
}

uint64_t checkpoint_hash(const NetSpec& spec, const ParamVector& params) {
    auto bytes = serialize_checkpoint(spec, params);
    return fnv1a(std::span<const unsigned char>(bytes.data(), bytes.size()));
}

uint64_t file_hash(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw UsageError("missing file: " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                     std::istreambuf_iterator<char>());
    return fnv1a(std::span<const unsigned char>(bytes.data(), bytes.size()));
}

}  // namespace flopsd
