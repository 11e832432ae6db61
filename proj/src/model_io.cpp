#include <string>

#include "sitsent/corpus.hpp"
#include "sitsent/error.hpp"
#include "sitsent/learners.hpp"

namespace sitsent {

namespace {

constexpr std::string_view kMagic = "sitsent-linear v1";

std::vector<std::string> expect_line(std::istream& in, std::size_t& line,
                                     std::string_view key, std::size_t arity) {
  std::string raw;
  if (!std::getline(in, raw)) {
    throw FormatError(line + 1, "model file truncated before '" +
                                    std::string(key) + "'");
  }
  ++line;
  std::vector<std::string> f = split(raw, ' ');
  if (f.size() != arity + 1 || f[0] != key) {
    throw FormatError(line, "expected '" + std::string(key) + "' with " +
                                std::to_string(arity) + " values");
  }
  return f;
}

double to_double(const std::string& s, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) {
    throw FormatError(line, "bad number '" + s + "'");
  }
  return v;
}

std::uint64_t to_u64(const std::string& s, std::size_t line) {
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) {
    throw FormatError(line, "bad integer '" + s + "'");
  }
  return v;
}

std::string value_of(const std::string& kv, std::string_view key,
                     std::size_t line) {
  if (!kv.starts_with(key) || kv.size() <= key.size() || kv[key.size()] != '=') {
    throw FormatError(line, "expected " + std::string(key) + "=<value>");
  }
  return kv.substr(key.size() + 1);
}

}  // namespace

void save_linear_model(std::ostream& out, const LinearModel& m) {
  out << kMagic << "\n"
      << "layout " << m.layout.tfidf << " " << m.layout.embedding << " "
      << m.layout.lexicon << "\n"
      << "loss " << to_string(m.loss) << "\n"
      << "hyper lambda=" << format_number(m.hyper.lambda)
      << " epochs=" << m.hyper.epochs
      << " learning_rate=" << format_number(m.hyper.learning_rate)
      << " seed=" << m.hyper.seed << "\n"
      << "bias " << format_number(m.bias) << "\n"
      << "weights " << m.weights.size() << "\n";
  for (double w : m.weights) out << format_number(w) << "\n";
}

LinearModel load_linear_model(std::istream& in) {
  std::size_t line = 0;
  std::string raw;
  if (!std::getline(in, raw) || raw != kMagic) {
    throw FormatError(1, "not a linear model file (expected '" +
                             std::string(kMagic) + "')");
  }
  ++line;
  LinearModel m;
  auto layout = expect_line(in, line, "layout", 3);
  m.layout = {to_u64(layout[1], line), to_u64(layout[2], line),
              to_u64(layout[3], line)};
  m.loss = parse_loss_kind(expect_line(in, line, "loss", 1)[1]);
  auto hyper = expect_line(in, line, "hyper", 4);
  m.hyper.lambda = to_double(value_of(hyper[1], "lambda", line), line);
  m.hyper.epochs = static_cast<int>(to_u64(value_of(hyper[2], "epochs", line), line));
  m.hyper.learning_rate =
      to_double(value_of(hyper[3], "learning_rate", line), line);
  m.hyper.seed = to_u64(value_of(hyper[4], "seed", line), line);
  m.bias = to_double(expect_line(in, line, "bias", 1)[1], line);
  const std::uint64_t n = to_u64(expect_line(in, line, "weights", 1)[1], line);
  if (n != m.layout.total()) {
    throw LayoutError("model declares " + std::to_string(n) +
                      " weights for layout " + describe(m.layout));
  }
  m.weights.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    if (!std::getline(in, raw)) {
      throw FormatError(line + 1, "model file truncated in weight array");
    }
    ++line;
    m.weights.push_back(to_double(raw, line));
  }
  return m;
}

}  // namespace sitsent
