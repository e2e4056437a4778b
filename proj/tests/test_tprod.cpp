#include <doctest.h>

#include <cstring>
#include <random>

#include "rtsvd/tprod.hpp"

using namespace rtsvd;

namespace {

Tensor3 random_tensor(Index n1, Index n2, Index n3, unsigned seed) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    return Tensor3::generate(n1, n2, n3, [&](Index, Index, Index) { return dist(gen); });
}

double max_abs_diff(const Tensor3& a, const Tensor3& b) {
    REQUIRE(a.n1() == b.n1());
    REQUIRE(a.n2() == b.n2());
    REQUIRE(a.n3() == b.n3());
    double m = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i)
        m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

bool bit_identical(const Tensor3& a, const Tensor3& b) {
    return a.data().size() == b.data().size() &&
           std::memcmp(a.data().data(), b.data().data(),
                       a.data().size() * sizeof(double)) == 0;
}

} // namespace

TEST_SUITE("tprod") {

TEST_CASE("tube shift hand case") {
    // convolving with the unit shift (0,1,0) rotates (a,b,c) to (c,a,b)
    Tensor3 shift(1, 1, 3, {0.0, 1.0, 0.0});
    Tensor3 v(1, 1, 3, {5.0, 7.0, 11.0});
    for (const Tensor3& prod : {tprod_naive(shift, v), tprod(shift, v)}) {
        CHECK(prod(0, 0, 0) == doctest::Approx(11.0).epsilon(1e-13));
        CHECK(prod(0, 0, 1) == doctest::Approx(5.0).epsilon(1e-13));
        CHECK(prod(0, 0, 2) == doctest::Approx(7.0).epsilon(1e-13));
    }
}

TEST_CASE("transform path agrees with the convolution oracle") {
    for (auto [n1, n2, n4, n3, seed] : {std::tuple<Index, Index, Index, Index, unsigned>
             {2, 3, 4, 5, 40u}, {4, 2, 2, 6, 41u}, {1, 5, 3, 1, 42u}, {6, 6, 6, 8, 43u}}) {
        Tensor3 a = random_tensor(n1, n2, n3, seed);
        Tensor3 b = random_tensor(n2, n4, n3, seed + 100);
        CHECK(max_abs_diff(tprod(a, b), tprod_naive(a, b)) <= 1e-12);
    }
}

TEST_CASE("identity element acts trivially on both sides") {
    Tensor3 a = random_tensor(4, 3, 5, 44);
    CHECK(max_abs_diff(tprod(identity_tensor(4, 5), a), a) <= 1e-12);
    CHECK(max_abs_diff(tprod(a, identity_tensor(3, 5)), a) <= 1e-12);
}

TEST_CASE("transpose is an involution and reverses products") {
    Tensor3 a = random_tensor(3, 4, 6, 45);
    Tensor3 b = random_tensor(4, 2, 6, 46);
    CHECK(bit_identical(ttranspose(ttranspose(a)), a)); // pure permutation
    CHECK(max_abs_diff(ttranspose(tprod(a, b)), tprod(ttranspose(b), ttranspose(a))) <= 1e-12);
}

TEST_CASE("product is associative") {
    Tensor3 a = random_tensor(2, 3, 4, 47);
    Tensor3 b = random_tensor(3, 5, 4, 48);
    Tensor3 c = random_tensor(5, 2, 4, 49);
    CHECK(max_abs_diff(tprod(tprod(a, b), c), tprod(a, tprod(b, c))) <= 1e-10);
}

TEST_CASE("matricization is multiplicative") {
    Tensor3 a = random_tensor(2, 3, 4, 50);
    Tensor3 b = random_tensor(3, 2, 4, 51);
    Matrix lhs = block_circulant(tprod(a, b));
    Matrix rhs = block_circulant(a) * block_circulant(b);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("symmetry shortcut changes nothing") {
    Tensor3 a = random_tensor(5, 4, 6, 52);
    Tensor3 b = random_tensor(4, 3, 6, 53);
    CHECK(max_abs_diff(tprod(a, b, true), tprod(a, b, false)) <= 1e-12);
    Tensor3 c = random_tensor(4, 3, 7, 54);
    Tensor3 d = random_tensor(3, 3, 7, 55);
    CHECK(max_abs_diff(tprod(c, d, true), tprod(c, d, false)) <= 1e-12);
}

TEST_CASE("qr factors reproduce the input") {
    for (auto [n1, n2, n3, seed] : {std::tuple<Index, Index, Index, unsigned>
             {6, 4, 5, 56u}, {4, 6, 4, 57u}, {5, 5, 1, 58u}}) {
        Tensor3 a = random_tensor(n1, n2, n3, seed);
        TQr f = t_qr(a);
        REQUIRE(f.q.n2() == std::min(n1, n2));
        CHECK(max_abs_diff(tprod(f.q, f.r), a) <= 1e-10);
        CHECK(is_orthogonal(f.q));
    }
}

TEST_CASE("qr triangular factor is normalized per fourier slice") {
    Tensor3 a = random_tensor(6, 4, 5, 59);
    TQr f = t_qr(a);
    FourierTensor3 rh = fft_mode3(f.r);
    for (Index s = 0; s < 5; ++s) {
        const CMatrix& r = rh.slice(s);
        for (Index i = 0; i < r.rows(); ++i) {
            CHECK(r(i, i).imag() == doctest::Approx(0.0).epsilon(1e-12));
            CHECK(r(i, i).real() >= -1e-12);
            for (Index j = 0; j < i; ++j)
                CHECK(std::abs(r(i, j)) <= 1e-12);
        }
    }
}

TEST_CASE("qr is deterministic") {
    Tensor3 a = random_tensor(5, 4, 6, 60);
    TQr f1 = t_qr(a);
    TQr f2 = t_qr(a);
    CHECK(bit_identical(f1.q, f2.q));
    CHECK(bit_identical(f1.r, f2.r));
}

TEST_CASE("orthogonality predicate") {
    CHECK(is_orthogonal(identity_tensor(4, 3)));
    CHECK_FALSE(is_orthogonal(Tensor3(4, 4, 3))); // zero tensor
    TQr f = t_qr(random_tensor(7, 3, 4, 61));
    CHECK(is_orthogonal(f.q));
    CHECK_FALSE(is_orthogonal(f.r));
}

TEST_CASE("f-diagonal predicate") {
    Tensor3 diag = Tensor3::generate(3, 3, 4, [](Index i, Index j, Index) {
        return i == j ? 2.0 + static_cast<double>(i) : 0.0;
    });
    CHECK(is_f_diagonal(diag));
    Tensor3 off = Tensor3::generate(3, 3, 4, [](Index i, Index j, Index k) {
        return i == j ? 2.0 : (i == 0 && j == 2 && k == 1 ? 0.5 : 0.0);
    });
    CHECK_FALSE(is_f_diagonal(off));
}

TEST_CASE("convolution oracle refuses oversized inputs") {
    Tensor3 a = random_tensor(6, 6, 8, 62);
    Tensor3 b = random_tensor(6, 6, 8, 63);
    CHECK_THROWS_AS(tprod_naive(a, b, 1000), SizeLimit);
}

TEST_CASE("shape mismatches are rejected") {
    Tensor3 a = random_tensor(2, 3, 4, 64);
    CHECK_THROWS_AS(tprod(a, random_tensor(4, 2, 4, 65)), DimensionMismatch);
    CHECK_THROWS_AS(tprod(a, random_tensor(3, 2, 5, 66)), DimensionMismatch);
    CHECK_THROWS_AS(tprod_naive(a, random_tensor(4, 2, 4, 67)), DimensionMismatch);
}

} // TEST_SUITE
