#include "pilotwave/multiindex.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <sstream>

namespace pilotwave {

namespace {

void require_same_dimension(const MultiIndex& a, const MultiIndex& b) {
  if (a.dimension() != b.dimension()) {
    throw DimensionError("multi-index dimension mismatch: " + a.to_string() + " vs " +
                         b.to_string());
  }
}

int sign_of_power(int exponent) { return (exponent % 2 == 0) ? 1 : -1; }

}  // namespace

MultiIndex::MultiIndex(std::initializer_list<int> entries) : MultiIndex(std::vector<int>(entries)) {}

MultiIndex::MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) {
  for (int e : entries_) {
    if (e < 0) throw std::invalid_argument("multi-index entries must be non-negative");
  }
}

MultiIndex MultiIndex::unit(std::size_t dimension, std::size_t axis) {
  if (axis >= dimension) throw DimensionError("unit multi-index axis out of range");
  MultiIndex e(dimension);
  e.entries_[axis] = 1;
  return e;
}

int MultiIndex::order() const { return std::accumulate(entries_.begin(), entries_.end(), 0); }

BigInt MultiIndex::factorial() const {
  BigInt result = 1;
  for (int e : entries_) result *= pilotwave::factorial(e);
  return result;
}

bool MultiIndex::le(const MultiIndex& other) const {
  require_same_dimension(*this, other);
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    if (entries_[k] > other.entries_[k]) return false;
  }
  return true;
}

MultiIndex MultiIndex::operator+(const MultiIndex& other) const {
  require_same_dimension(*this, other);
  MultiIndex out(*this);
  for (std::size_t k = 0; k < entries_.size(); ++k) out.entries_[k] += other.entries_[k];
  return out;
}

MultiIndex MultiIndex::operator-(const MultiIndex& other) const {
  require_same_dimension(*this, other);
  MultiIndex out(*this);
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    out.entries_[k] -= other.entries_[k];
    if (out.entries_[k] < 0) {
      throw std::domain_error("multi-index difference " + to_string() + " - " +
                              other.to_string() + " has a negative entry");
    }
  }
  return out;
}

std::strong_ordering MultiIndex::operator<=>(const MultiIndex& other) const {
  if (auto c = entries_.size() <=> other.entries_.size(); c != 0) return c;
  if (auto c = order() <=> other.order(); c != 0) return c;
  // Within one degree, larger leading entries come first: [2,0] < [1,1] < [0,2].
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    if (auto c = other.entries_[k] <=> entries_[k]; c != 0) return c;
  }
  return std::strong_ordering::equal;
}

std::string MultiIndex::to_string() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    if (k) os << ',';
    os << entries_[k];
  }
  os << ']';
  return os.str();
}

MultiIndex MultiIndex::parse(std::string_view text) {
  auto fail = [&](const std::string& why) {
    return std::invalid_argument("malformed multi-index '" + std::string(text) + "': " + why);
  };
  std::size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  };
  skip_ws();
  if (pos >= text.size() || text[pos] != '[') throw fail("expected '['");
  ++pos;
  std::vector<int> entries;
  skip_ws();
  if (pos < text.size() && text[pos] == ']') throw fail("empty multi-index");
  while (true) {
    skip_ws();
    std::size_t start = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    if (start == pos) throw fail("expected a non-negative integer");
    if (pos - start > 6) throw fail("entry too large");
    entries.push_back(std::stoi(std::string(text.substr(start, pos - start))));
    skip_ws();
    if (pos >= text.size()) throw fail("unterminated");
    if (text[pos] == ',') {
      ++pos;
      continue;
    }
    if (text[pos] == ']') {
      ++pos;
      break;
    }
    throw fail(std::string("unexpected character '") + text[pos] + "'");
  }
  skip_ws();
  if (pos != text.size()) throw fail("trailing characters");
  return MultiIndex(std::move(entries));
}

std::vector<MultiIndex> indices_below(const MultiIndex& bound) {
  std::vector<MultiIndex> out;
  const std::size_t dim = bound.dimension();
  std::vector<int> cur(dim, 0);
  if (dim == 0) return {MultiIndex(0)};
  while (true) {
    out.emplace_back(cur);
    std::size_t k = 0;
    while (k < dim) {
      if (cur[k] < bound[k]) {
        ++cur[k];
        break;
      }
      cur[k] = 0;
      ++k;
    }
    if (k == dim) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<MultiIndex> indices_up_to_order(std::size_t dimension, int max_order) {
  std::vector<MultiIndex> out;
  if (max_order < 0) return out;
  std::vector<int> bound(dimension, max_order);
  for (auto& n : indices_below(MultiIndex(bound))) {
    if (n.order() <= max_order) out.push_back(n);
  }
  return out;
}

BigInt factorial(int k) {
  if (k < 0) throw std::domain_error("factorial of a negative integer");
  BigInt result = 1;
  for (int j = 2; j <= k; ++j) result *= j;
  return result;
}

BigInt binom_int(long a, long b) {
  if (b < 0) return 0;
  if (b == 0) return 1;
  // Falling factorial a(a-1)...(a-b+1) / b!; exact for any integer a.
  BigInt num = 1;
  for (long j = 0; j < b; ++j) num *= BigInt(a - j);
  return num / factorial(static_cast<int>(b));
}

BigInt binom_multi(const MultiIndex& n, const MultiIndex& m) {
  require_same_dimension(n, m);
  BigInt result = 1;
  for (std::size_t k = 0; k < n.dimension(); ++k) {
    result *= binom_int(n[k], m[k]);
    if (result == 0) break;
  }
  return result;
}

IdentitySides combinatorial_identity_sides_1d(int r, int n, int m) {
  if (n < 0 || m < 0 || r < n + m + 1) {
    throw std::invalid_argument("identity requires 0 <= n, m and r >= n+m+1");
  }
  IdentitySides sides;
  for (int s = n + m + 1; s <= r; ++s) {
    Rational term(factorial(s - n - 1), factorial(s));
    term *= binom_int(r - n - m - 1, r - s);
    sides.lhs += sign_of_power(s) * term;
  }
  sides.rhs = Rational(factorial(m) * factorial(r - m - 1), factorial(r) * factorial(n));
  sides.rhs *= sign_of_power(n + m + 1);
  return sides;
}

bool check_combinatorial_identity_1d(int r, int n, int m) {
  return combinatorial_identity_sides_1d(r, n, m).holds();
}

IdentitySides combinatorial_identity_sides(const MultiIndex& r, const MultiIndex& n,
                                           const MultiIndex& m, std::size_t axis) {
  require_same_dimension(r, n);
  require_same_dimension(r, m);
  const MultiIndex ei = MultiIndex::unit(r.dimension(), axis);
  const MultiIndex lower = n + m + ei;
  if (!lower.le(r)) throw std::invalid_argument("identity requires r >= n+m+e_i");

  const MultiIndex top = r - lower;  // r - n - m - e_i
  IdentitySides sides;
  // s ranges over lower <= s <= r, i.e. s = lower + d with 0 <= d <= top.
  for (const MultiIndex& d : indices_below(top)) {
    const MultiIndex s = lower + d;
    Rational term(factorial((s - n - ei).order()), factorial(s.order()));
    term *= binom_multi(top, r - s);
    sides.lhs += sign_of_power(s.order()) * term;
  }
  sides.rhs = Rational(factorial(m.order()) * factorial((r - m - ei).order()),
                       factorial(r.order()) * factorial(n.order()));
  sides.rhs *= sign_of_power((n + m).order() + 1);
  return sides;
}

bool check_combinatorial_identity(const MultiIndex& r, const MultiIndex& n, const MultiIndex& m,
                                  std::size_t axis) {
  return combinatorial_identity_sides(r, n, m, axis).holds();
}

double to_double(const Rational& value) { return value.convert_to<double>(); }

}  // namespace pilotwave
