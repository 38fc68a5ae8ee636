#include "s4/tape.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace s4 {

int ParamTape::add(const std::string& name, RVector init, std::vector<std::uint32_t> dims,
                   double lr_scale, bool trainable) {
  if (index_.count(name)) throw StateError("ParamTape: duplicate parameter " + name);
  Entry e;
  e.name = name;
  e.dims = dims.empty() ? std::vector<std::uint32_t>{static_cast<std::uint32_t>(init.size())}
                        : std::move(dims);
  std::size_t dim_prod = 1;
  for (auto d : e.dims) dim_prod *= d;
  if (dim_prod != static_cast<std::size_t>(init.size())) {
    throw SizeError("ParamTape: dims do not match value size for " + name);
  }
  e.grad = RVector::Zero(init.size());
  e.m = RVector::Zero(init.size());
  e.v = RVector::Zero(init.size());
  e.value = std::move(init);
  e.lr_scale = lr_scale;
  e.trainable = trainable;
  entries_.push_back(std::move(e));
  const int idx = static_cast<int>(entries_.size()) - 1;
  index_[name] = idx;
  return idx;
}

ParamTape::Entry& ParamTape::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw StateError("ParamTape: no parameter named " + name);
  return entries_[it->second];
}

const ParamTape::Entry& ParamTape::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw StateError("ParamTape: no parameter named " + name);
  return entries_[it->second];
}

std::size_t ParamTape::total_params() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.value.size();
  return n;
}

void ParamTape::zero_grad() {
  for (auto& e : entries_) e.grad.setZero();
}

void ParamTape::adam_step(double lr, double beta1, double beta2, double eps) {
  ++step_;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_));
  for (auto& e : entries_) {
    if (!e.trainable) continue;
    e.m = beta1 * e.m + (1.0 - beta1) * e.grad;
    e.v = beta2 * e.v + (1.0 - beta2) * e.grad.cwiseProduct(e.grad);
    const double rate = lr * e.lr_scale;
    for (Eigen::Index i = 0; i < e.value.size(); ++i) {
      const double mhat = e.m[i] / bc1;
      const double vhat = e.v[i] / bc2;
      e.value[i] -= rate * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

std::string ParamTape::norms_report() const {
  std::string out;
  char buf[256];
  for (const auto& e : entries_) {
    std::snprintf(buf, sizeof(buf), "%-28s |w|=%.6e |g|=%.6e\n", e.name.c_str(), e.value.norm(),
                  e.grad.norm());
    out += buf;
  }
  return out;
}

GradBuffer::GradBuffer(const ParamTape& tape) {
  g.reserve(tape.count());
  for (Eigen::Index i = 0; i < tape.count(); ++i) {
    g.push_back(RVector::Zero(tape.entry(static_cast<int>(i)).value.size()));
  }
}

void GradBuffer::reset() {
  for (auto& v : g) v.setZero();
}

void accumulate(ParamTape& tape, const GradBuffer& buf) {
  for (Eigen::Index i = 0; i < tape.count(); ++i) {
    tape.entry(static_cast<int>(i)).grad += buf.g[i];
  }
}

namespace {

void write_u32(std::ofstream& f, std::uint32_t v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::ifstream& f) {
  std::uint32_t v = 0;
  f.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

}  // namespace

void save_checkpoint(const ParamTape& tape, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open checkpoint for writing: " + path);
  f.write("S4CK", 4);
  write_u32(f, 1);  // version
  write_u32(f, static_cast<std::uint32_t>(tape.count()));
  for (Eigen::Index i = 0; i < tape.count(); ++i) {
    const auto& e = tape.entry(static_cast<int>(i));
    write_u32(f, static_cast<std::uint32_t>(e.name.size()));
    f.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
    write_u32(f, static_cast<std::uint32_t>(e.dims.size()));
    for (auto d : e.dims) write_u32(f, d);
    f.write(reinterpret_cast<const char*>(e.value.data()),
            static_cast<std::streamsize>(e.value.size() * sizeof(double)));
  }
  if (!f) throw IoError("checkpoint write failed: " + path);
}

void load_checkpoint(ParamTape& tape, const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open checkpoint: " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, "S4CK", 4) != 0) {
    throw IoError("not a checkpoint file (bad magic): " + path);
  }
  const std::uint32_t version = read_u32(f);
  if (version != 1) throw IoError("unsupported checkpoint version");
  const std::uint32_t count = read_u32(f);
  if (count != static_cast<std::uint32_t>(tape.count())) {
    throw ConfigError("checkpoint does not match model config: expected " +
                      std::to_string(tape.count()) + " parameter blocks, file has " +
                      std::to_string(count));
  }
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = read_u32(f);
    std::string name(name_len, '\0');
    f.read(name.data(), name_len);
    const std::uint32_t rank = read_u32(f);
    std::vector<std::uint32_t> dims(rank);
    std::size_t total = 1;
    for (auto& d : dims) {
      d = read_u32(f);
      total *= d;
    }
    auto& e = tape.entry(static_cast<int>(i));
    if (e.name != name || e.dims != dims) {
      throw ConfigError("checkpoint does not match model config at block " + name);
    }
    f.read(reinterpret_cast<char*>(e.value.data()),
           static_cast<std::streamsize>(total * sizeof(double)));
  }
  if (!f) throw IoError("checkpoint truncated: " + path);
}

}  // namespace s4
