// Copyright 2026 The gilt Authors
// SPDX-License-Identifier: Apache-2.0

#include "gilt/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "gilt/config.hpp"
#include "gilt/errors.hpp"

namespace gilt {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoints assume a little-endian host");

constexpr char kMagic[8] = {'G', 'I', 'L', 'T', 'C', 'K', 'P', 'T'};

class Writer {
 public:
  explicit Writer(std::ofstream& out) : out_(out) {}
  template <class T>
  void pod(T v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof v);
  }
  void str(const std::string& s) {
    pod(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void array(const std::string& name, const Matrix& m, ArrayDtype dtype) {
    str(name);
    pod(static_cast<std::uint8_t>(dtype));
    pod(static_cast<std::uint64_t>(m.rows()));
    pod(static_cast<std::uint64_t>(m.cols()));
    for (double v : m.data()) {
      if (dtype == ArrayDtype::f64) pod(v);
      else pod(static_cast<float>(v));
    }
  }

 private:
  std::ofstream& out_;
};

class Reader {
 public:
  explicit Reader(std::ifstream& in) : in_(in) {}
  template <class T>
  T pod() {
    T v{};
    in_.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in_) throw ParseError("checkpoint truncated");
    return v;
  }
  std::string str() {
    const auto n = pod<std::uint32_t>();
    if (n > (1u << 30)) throw ParseError("checkpoint string too long");
    std::string s(n, '\0');
    in_.read(s.data(), n);
    if (!in_) throw ParseError("checkpoint truncated");
    return s;
  }
  std::pair<std::string, Matrix> array() {
    std::string name = str();
    const auto dtype = pod<std::uint8_t>();
    const auto rows = pod<std::uint64_t>();
    const auto cols = pod<std::uint64_t>();
    if (dtype > 1) throw ParseError("checkpoint array '" + name + "' has unknown dtype");
    if (rows * cols > (std::uint64_t{1} << 34)) throw ParseError("checkpoint array '" + name + "' too large");
    Matrix m(rows, cols);
    for (double& v : m.data()) v = dtype == 0 ? pod<double>() : static_cast<double>(pod<float>());
    return {std::move(name), std::move(m)};
  }

 private:
  std::ifstream& in_;
};

std::uint8_t arch_flags(const ModelConfig& m) {
  std::uint8_t f = 0;
  if (m.unshared_attention) f |= 1;
  if (m.encoder_variant == EncoderVariant::nonlinear) f |= 2;
  if (m.align_mode == AlignMode::learnable_projection) f |= 4;
  return f;
}

Matrix vec_row(const std::vector<double>& v) { return Matrix(1, v.size(), v); }

}  // namespace

void write_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path, ArrayDtype dtype) {
  const ModelConfig& mc = ckpt.state.params.config;
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    Writer w(out);
    out.write(kMagic, sizeof kMagic);
    w.pod(kCheckpointVersion);
    w.pod(static_cast<std::uint64_t>(mc.dim));
    w.pod(static_cast<std::int32_t>(mc.encoder_layers));
    w.pod(static_cast<std::int32_t>(mc.icl_layers));
    w.pod(static_cast<std::int32_t>(mc.heads));
    w.pod(static_cast<std::uint64_t>(mc.ffn_hidden));
    w.pod(arch_flags(mc));
    w.pod(static_cast<std::int32_t>(ckpt.state.epoch));
    w.pod(static_cast<std::uint64_t>(ckpt.state.step));
    w.pod(static_cast<std::uint64_t>(ckpt.state.optimizer.t));
    w.str(ckpt.state.rng_state);
    TrainConfig cfg = ckpt.config;
    cfg.model = mc;
    w.str(to_key_value_text(cfg));

    std::uint32_t count = static_cast<std::uint32_t>(ckpt.state.params.arrays.size() +
                                                     ckpt.state.optimizer.m.size() + ckpt.state.optimizer.v.size() +
                                                     5 * ckpt.pca.size());
    w.pod(count);
    for (const auto& [name, m] : ckpt.state.params.arrays) w.array("param/" + name, m, dtype);
    for (const auto& [name, m] : ckpt.state.optimizer.m) w.array("adam.m/" + name, m, dtype);
    for (const auto& [name, m] : ckpt.state.optimizer.v) w.array("adam.v/" + name, m, dtype);
    for (const auto& [key, p] : ckpt.pca) {
      const std::string base = "pca/" + key + "/";
      std::vector<double> degenerate(p.degenerate.begin(), p.degenerate.end());
      w.array(base + "mean", p.mean, dtype);
      w.array(base + "basis", p.basis, dtype);
      w.array(base + "variance", vec_row(p.explained_variance), dtype);
      w.array(base + "degenerate", vec_row(degenerate), dtype);
      w.array(base + "total", Matrix(1, 1, p.total_variance), dtype);
    }
    out.flush();
    if (!out) throw IoError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into place: " + ec.message());

  auto sidecar = path;
  sidecar += ".json";
  auto sidecar_tmp = sidecar;
  sidecar_tmp += ".tmp";
  {
    std::ofstream out(sidecar_tmp, std::ios::trunc);
    if (!out) throw IoError("cannot write '" + sidecar_tmp.string() + "'");
    TrainConfig cfg = ckpt.config;
    cfg.model = mc;
    out << to_json(cfg) << "\n";
  }
  std::filesystem::rename(sidecar_tmp, sidecar, ec);
  if (ec) throw IoError("cannot move config sidecar into place: " + ec.message());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path.string() + "'");
  Reader r(in);
  char magic[8] = {};
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw ParseError("not a checkpoint file (bad magic)");
  const auto version = r.pod<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw ParseError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto dim = r.pod<std::uint64_t>();
  const auto enc = r.pod<std::int32_t>();
  const auto icl = r.pod<std::int32_t>();
  const auto heads = r.pod<std::int32_t>();
  const auto ffn = r.pod<std::uint64_t>();
  const auto flags = r.pod<std::uint8_t>();

  Checkpoint ck;
  ck.state.epoch = r.pod<std::int32_t>();
  ck.state.step = r.pod<std::uint64_t>();
  ck.state.optimizer.t = r.pod<std::uint64_t>();
  ck.state.rng_state = r.str();
  try {
    ck.config = apply_key_values(parse_key_values(r.str()), TrainConfig{});
  } catch (const ConfigError& e) {
    throw ParseError(std::string("checkpoint config: ") + e.what());
  }
  const ModelConfig& mc = ck.config.model;
  if (mc.dim != dim || mc.encoder_layers != enc || mc.icl_layers != icl || mc.heads != heads ||
      mc.ffn_hidden != ffn || arch_flags(mc) != flags) {
    throw ParseError("checkpoint header disagrees with its stored config");
  }
  ck.state.params.config = mc;

  const auto count = r.pod<std::uint32_t>();
  std::map<std::string, PcaModel> pca;
  std::vector<std::string> pca_order;
  for (std::uint32_t i = 0; i < count; ++i) {
    auto [name, m] = r.array();
    auto take = [&name](const char* prefix) -> std::optional<std::string> {
      const std::string p = prefix;
      if (name.rfind(p, 0) == 0) return name.substr(p.size());
      return std::nullopt;
    };
    if (auto n = take("param/")) {
      ck.state.params.arrays.emplace(*n, std::move(m));
    } else if (auto n2 = take("adam.m/")) {
      ck.state.optimizer.m.emplace(*n2, std::move(m));
    } else if (auto n3 = take("adam.v/")) {
      ck.state.optimizer.v.emplace(*n3, std::move(m));
    } else if (auto n4 = take("pca/")) {
      const auto slash = n4->rfind('/');
      if (slash == std::string::npos) throw ParseError("bad PCA array name '" + name + "'");
      const std::string key = n4->substr(0, slash);
      const std::string field = n4->substr(slash + 1);
      if (pca.count(key) == 0) pca_order.push_back(key);
      PcaModel& p = pca[key];
      if (field == "mean") {
        p.mean = std::move(m);
        p.input_dim = p.mean.cols();
      } else if (field == "basis") {
        p.basis = std::move(m);
      } else if (field == "variance") {
        p.explained_variance.assign(m.data().begin(), m.data().end());
      } else if (field == "degenerate") {
        p.degenerate.clear();
        for (double v : m.data()) p.degenerate.push_back(v != 0.0);
      } else if (field == "total") {
        p.total_variance = m.size() == 1 ? m(0, 0) : 0.0;
      } else {
        throw ParseError("unknown PCA field '" + field + "'");
      }
    } else {
      throw ParseError("unknown checkpoint array '" + name + "'");
    }
  }
  for (const auto& key : pca_order) {
    PcaModel p = pca[key];
    p.all_constant = !p.explained_variance.empty() && !(p.explained_variance.front() > 0.0);
    ck.pca.emplace_back(key, std::move(p));
  }
  // Every architecture array must be present with its expected shape.
  const ModelParams expected = init_params(mc, 0);
  for (const auto& [name, m] : expected.arrays) {
    auto it = ck.state.params.arrays.find(name);
    if (it == ck.state.params.arrays.end()) throw ParseError("checkpoint is missing parameter '" + name + "'");
    if (it->second.rows() != m.rows() || it->second.cols() != m.cols()) {
      throw ParseError("checkpoint parameter '" + name + "' has the wrong shape");
    }
  }
  if (ck.state.params.arrays.size() != expected.arrays.size()) {
    throw ParseError("checkpoint holds parameters the architecture does not define");
  }
  return ck;
}

std::string checkpoint_id(const Checkpoint& ckpt) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fingerprint(ckpt.state.params)));
  return buf;
}

}  // namespace gilt
