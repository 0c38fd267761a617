#ifndef PILOTWAVE_MULTIINDEX_HPP
#define PILOTWAVE_MULTIINDEX_HPP

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace pilotwave {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Element of N_0^N.  Labels a mixed partial derivative D^n together with
/// the factorial/binomial algebra used by the operator and current formulas.
///
/// The ordering is graded lexicographic (total order first, then entries),
/// which fixes the iteration order of every map keyed by MultiIndex.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::size_t dimension) : entries_(dimension, 0) {}
  MultiIndex(std::initializer_list<int> entries);
  explicit MultiIndex(std::vector<int> entries);

  static MultiIndex zero(std::size_t dimension) { return MultiIndex(dimension); }
  /// e_axis, with axis counted from 0.
  static MultiIndex unit(std::size_t dimension, std::size_t axis);

  std::size_t dimension() const { return entries_.size(); }
  int operator[](std::size_t axis) const { return entries_[axis]; }
  std::span<const int> entries() const { return entries_; }

  /// |n| = sum of entries.
  int order() const;
  bool is_zero() const { return order() == 0; }

  /// n! = product of entry factorials.
  BigInt factorial() const;

  /// Componentwise n <= other.
  bool le(const MultiIndex& other) const;

  MultiIndex operator+(const MultiIndex& other) const;
  /// Throws std::domain_error if any entry would become negative.
  MultiIndex operator-(const MultiIndex& other) const;

  bool operator==(const MultiIndex& other) const = default;
  std::strong_ordering operator<=>(const MultiIndex& other) const;

  /// "[2,0,1]"
  std::string to_string() const;
  /// Parses "[2,0,1]"; whitespace tolerated.
  static MultiIndex parse(std::string_view text);

 private:
  std::vector<int> entries_;
};

/// All m with 0 <= m <= bound, in graded-lexicographic order.
std::vector<MultiIndex> indices_below(const MultiIndex& bound);

/// All multi-indices of the given dimension with |n| <= max_order.
std::vector<MultiIndex> indices_up_to_order(std::size_t dimension, int max_order);

BigInt factorial(int k);

/// Binomial coefficient with the conventions C(a,b)=0 for b<0, C(a,0)=1 and
/// the falling-factorial form otherwise (so C(a,b)=0 for 0<=a<b).  Exact.
BigInt binom_int(long a, long b);

/// Product of componentwise binomials.
BigInt binom_multi(const MultiIndex& n, const MultiIndex& m);

/// Both sides of the one-dimensional alternating factorial identity
///   sum_{s=n+m+1}^{r} (-1)^s (s-n-1)!/s! C(r-n-m-1, r-s)
///     = (-1)^{n+m+1} m!(r-m-1)!/(r! n!)
/// used in the reality proof of the 1D current.  Requires r >= n+m+1.
struct IdentitySides {
  Rational lhs;
  Rational rhs;
  bool holds() const { return lhs == rhs; }
};

IdentitySides combinatorial_identity_sides_1d(int r, int n, int m);
bool check_combinatorial_identity_1d(int r, int n, int m);

/// Multi-index generalisation (axis counted from 0):
///   sum_{n+m+e_i <= s <= r} (-1)^{|s|} |s-n-e_i|!/|s|! C(r-n-m-e_i, r-s)
///     = (-1)^{|n+m|+1} |m|! |r-m-e_i|! / (|r|! |n|!)
/// Requires r >= n+m+e_i.
IdentitySides combinatorial_identity_sides(const MultiIndex& r, const MultiIndex& n,
                                           const MultiIndex& m, std::size_t axis);
bool check_combinatorial_identity(const MultiIndex& r, const MultiIndex& n,
                                  const MultiIndex& m, std::size_t axis);

double to_double(const Rational& value);

}  // namespace pilotwave

#endif  // PILOTWAVE_MULTIINDEX_HPP
