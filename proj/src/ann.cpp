#include "kolmonet/ann.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>

namespace kolmonet {

Network::Network(std::vector<Layer> layers) : layers_(std::move(layers)) {
  if (layers_.size() < 2)
    throw std::invalid_argument("network: need at least 2 affine layers, got " +
                                std::to_string(layers_.size()));
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const Layer& l = layers_[k];
    if (l.W.rows() == 0 || l.W.cols() == 0)
      throw std::invalid_argument("network: layer " + std::to_string(k + 1) +
                                  " has an empty weight matrix");
    if (l.b.size() != l.W.rows())
      throw std::invalid_argument("network: layer " + std::to_string(k + 1) +
                                  " bias length does not match its row count");
    if (k > 0 && l.W.cols() != layers_[k - 1].W.rows())
      throw std::invalid_argument("network: layer " + std::to_string(k + 1) +
                                  " expects input width " + std::to_string(l.W.cols()) +
                                  " but layer " + std::to_string(k) + " outputs " +
                                  std::to_string(layers_[k - 1].W.rows()));
  }
  if (layers_.back().W.rows() != 1)
    throw std::invalid_argument("network: output width must be 1, got " +
                                std::to_string(layers_.back().W.rows()));
}

std::vector<Eigen::Index> Network::widths() const {
  std::vector<Eigen::Index> w;
  w.reserve(layers_.size() + 1);
  w.push_back(input_dim());
  for (const Layer& l : layers_) w.push_back(l.W.rows());
  return w;
}

namespace detail {
void check_realize_input(const Network& net, Eigen::Index x_size) {
  if (net.layers().empty()) throw std::invalid_argument("realize: empty network");
  if (x_size != net.input_dim())
    throw std::invalid_argument("realize: input has size " + std::to_string(x_size) +
                                " but layer 1 expects " +
                                std::to_string(net.input_dim()));
}
}  // namespace detail

double realize(const Network& net, const Eigen::Ref<const Vector>& x, Activation act) {
  if (act == Activation::Identity)
    return realize(net, x, [](double t) { return t; });
  return realize(net, x, [](double t) { return relu(t); });
}

std::int64_t param_count(const Network& net) {
  std::int64_t total = 0;
  for (const Layer& l : net.layers()) total += l.W.size() + l.b.size();
  return total;
}

std::int64_t nonzero_param_count(const Network& net) {
  std::int64_t total = 0;
  for (const Layer& l : net.layers()) {
    total += (l.W.array() != 0.0).count();
    total += (l.b.array() != 0.0).count();
  }
  return total;
}

namespace {

void put_shortest(std::ostream& os, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  os.write(buf, res.ptr - buf);
}

struct LineReader {
  std::istream& is;
  int line_no = 0;
  std::string line = {};

  bool next() {
    while (std::getline(is, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw std::runtime_error("network load: line " + std::to_string(line_no) + ": " + what);
  }
};

std::vector<double> parse_row(LineReader& r, Eigen::Index expected) {
  std::vector<double> out;
  const char* p = r.line.data();
  const char* end = p + r.line.size();
  while (p != end) {
    while (p != end && (*p == ' ' || *p == '\t')) ++p;
    if (p == end) break;
    double v = 0.0;
    auto res = std::from_chars(p, end, v);
    if (res.ec != std::errc{})
      r.fail("non-numeric token at column " + std::to_string(p - r.line.data() + 1));
    p = res.ptr;
    out.push_back(v);
  }
  if (static_cast<Eigen::Index>(out.size()) != expected)
    r.fail("expected " + std::to_string(expected) + " tokens, found " +
           std::to_string(out.size()));
  return out;
}

}  // namespace

void save_network(const Network& net, std::ostream& os) {
  os << "ANNv1\n";
  const auto widths = net.widths();
  for (std::size_t i = 0; i < widths.size(); ++i) {
    if (i) os << ' ';
    os << widths[i];
  }
  os << '\n';
  for (const Layer& l : net.layers()) {
    for (Eigen::Index r = 0; r < l.W.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.W.cols(); ++c) {
        if (c) os << ' ';
        put_shortest(os, l.W(r, c));
      }
      os << '\n';
    }
    for (Eigen::Index i = 0; i < l.b.size(); ++i) {
      if (i) os << ' ';
      put_shortest(os, l.b[i]);
    }
    os << '\n';
  }
}

void save_network(const Network& net, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("network save: cannot open " + path.string());
  save_network(net, os);
  if (!os) throw std::runtime_error("network save: write failed for " + path.string());
}

Network load_network(std::istream& is) {
  LineReader r{is};
  if (!r.next()) r.fail("empty stream, expected ANNv1 header");
  if (r.line != "ANNv1") r.fail("malformed header, expected ANNv1");
  if (!r.next()) r.fail("missing widths line");

  std::vector<Eigen::Index> widths;
  {
    const char* p = r.line.data();
    const char* end = p + r.line.size();
    while (p != end) {
      while (p != end && (*p == ' ' || *p == '\t')) ++p;
      if (p == end) break;
      long long w = 0;
      auto res = std::from_chars(p, end, w);
      if (res.ec != std::errc{} || w <= 0) r.fail("widths must be positive integers");
      p = res.ptr;
      widths.push_back(static_cast<Eigen::Index>(w));
    }
  }
  if (widths.size() < 3) r.fail("need at least 3 widths (2 affine layers)");
  if (widths.back() != 1) r.fail("output width must be 1");

  std::vector<Layer> layers;
  for (std::size_t k = 1; k < widths.size(); ++k) {
    Layer l;
    l.W.resize(widths[k], widths[k - 1]);
    for (Eigen::Index row = 0; row < widths[k]; ++row) {
      if (!r.next())
        r.fail("truncated: expected weight row " + std::to_string(row + 1) + " of layer " +
               std::to_string(k) + " (" + std::to_string(widths[k - 1]) + " tokens)");
      auto vals = parse_row(r, widths[k - 1]);
      for (Eigen::Index c = 0; c < widths[k - 1]; ++c) l.W(row, c) = vals[c];
    }
    if (!r.next())
      r.fail("truncated: expected bias line of layer " + std::to_string(k) + " (" +
             std::to_string(widths[k]) + " tokens)");
    auto vals = parse_row(r, widths[k]);
    l.b = Eigen::Map<const Vector>(vals.data(), widths[k]);
    layers.push_back(std::move(l));
  }
  return Network(std::move(layers));
}

Network load_network(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("network load: cannot open " + path.string());
  return load_network(is);
}

}  // namespace kolmonet
