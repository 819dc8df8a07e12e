from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from evildet import cyclotomic as cy
from evildet.cauchy import field_det
from evildet.cyclotomic import CycloElem, cyclo_inv, cyclo_mul, gauss_sum, zeta, zeta_half_power
from evildet.matrix import build_chapman, det_bareiss
from evildet.numtheory import legendre
from evildet.quadfield import class_number, compute_a, fundamental_unit
from oracles import cyclo_mul_naive


def elements(p, bound=20):
    return st.tuples(
        st.lists(st.integers(-bound, bound), min_size=p - 1, max_size=p - 1),
        st.integers(1, 12),
    ).map(lambda t: CycloElem(p, t[0], t[1]))


def nonzero(p):
    return elements(p).filter(lambda x: not x.is_zero())


FIELDS = st.sampled_from([3, 5, 7, 13, 17])


class TestElement:
    def test_canonical_form(self):
        x = CycloElem(5, [2, 4, 6, 8], 4)
        assert x.num == (1, 2, 3, 4) and x.den == 2
        assert CycloElem(5, [1, 0, 0, 0], -2) == Fraction(-1, 2)
        assert x.coeffs == (Fraction(1, 2), 1, Fraction(3, 2), 2)

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            CycloElem(5, [1, 2, 3])
        with pytest.raises(ZeroDivisionError):
            CycloElem(5, [1, 0, 0, 0], 0)
        with pytest.raises(ValueError):
            zeta(5) + zeta(7)

    def test_rational_iff_tail_zero(self):
        assert CycloElem.rational(7, Fraction(3, 5)).is_rational()
        assert not zeta(7).is_rational()
        # 1 + zeta + ... + zeta^(p-1) = 0
        total = sum((zeta(7, k) for k in range(7)), CycloElem.zero(7))
        assert total == 0 and total.is_rational()

    def test_full_rotation(self):
        for p in [5, 7, 13]:
            assert zeta(p) * zeta(p, p - 1) == 1

    def test_small_exponent_product(self):
        assert zeta(7, 2) * zeta(7, 3) == zeta(7, 5)

    def test_gauss_square_p5(self):
        t = gauss_sum(1, 5)
        assert t * t == 5

    @given(FIELDS.flatmap(lambda p: st.tuples(elements(p), elements(p))))
    @settings(max_examples=150)
    def test_mul_matches_schoolbook(self, xy):
        x, y = xy
        assert cyclo_mul(x, y).coeffs == tuple(cyclo_mul_naive(list(x.coeffs), list(y.coeffs), x.p))

    @given(FIELDS.flatmap(lambda p: st.tuples(elements(p, 10**12), elements(p, 10**12))))
    @settings(max_examples=80)
    def test_mul_large_coefficients(self, xy):
        x, y = xy
        assert cyclo_mul(x, y).coeffs == tuple(cyclo_mul_naive(list(x.coeffs), list(y.coeffs), x.p))

    @given(FIELDS.flatmap(lambda p: st.tuples(elements(p), elements(p), elements(p))))
    @settings(max_examples=100)
    def test_ring_axioms(self, xyz):
        x, y, z = xyz
        assert (x * y) * z == x * (y * z)
        assert x * (y + z) == x * y + x * z
        assert x * y == y * x
        assert (x + y) - y == x
        assert x + (-x) == 0

    @given(FIELDS.flatmap(nonzero))
    @settings(max_examples=100)
    def test_inverse_round_trip(self, x):
        inv = cyclo_inv(x)
        assert x * inv == 1
        assert inv == cyclo_inv(x, method="norm")
        assert cyclo_inv(inv) == x

    def test_inverse_examples(self):
        assert cyclo_inv(CycloElem.one(5)) == 1
        x = 1 - zeta(5)
        assert cyclo_inv(x) * x == 1
        # -zeta^(p-1) written out on the power basis
        y = CycloElem(5, [1, 1, 1, 1])
        assert cyclo_inv(y) * y == 1

    def test_inverse_of_zero(self):
        with pytest.raises(ZeroDivisionError):
            cyclo_inv(CycloElem.zero(5))
        with pytest.raises(ValueError):
            cyclo_inv(zeta(5) + 1, method="bogus")

    @given(FIELDS.flatmap(lambda p: st.tuples(elements(p), st.integers(1, p - 1))))
    def test_galois_is_multiplicative(self, xr):
        x, r = xr
        assert (x * x).galois(r) == x.galois(r) * x.galois(r)

    def test_powers(self):
        z = zeta(7)
        assert z ** 7 == 1 and z ** -1 == zeta(7, 6)
        assert (z + 2) ** -2 * (z + 2) ** 2 == 1

    def test_mixing_with_fractions(self):
        z = zeta(5)
        assert Fraction(1, 2) * z * 2 == z
        assert (z / Fraction(1, 3)) == 3 * z
        assert Fraction(1) / z == zeta(5, 4)


class TestHalfPowersAndGaussSums:
    def test_half_power_examples(self):
        assert zeta_half_power(2, 13) == zeta(13)
        assert zeta_half_power(1, 5) == -zeta(5, 3)
        for p in [5, 7, 13]:
            assert zeta_half_power(1, p) ** 2 == zeta(p)
            for k in range(-6, 7):
                assert zeta_half_power(k, p) * zeta_half_power(-k, p) == 1
                if k % 2 == 0:
                    assert zeta_half_power(k, p) == zeta(p, k // 2)

    @pytest.mark.parametrize("p", [5, 7, 11, 13])
    def test_gauss_sum_zero_index(self, p):
        assert gauss_sum(0, p) == 0
        assert gauss_sum(p, p) == 0

    @pytest.mark.parametrize("p", [5, 13, 17, 29, 37, 41])
    def test_gauss_sum_squares(self, p):
        assert gauss_sum(1, p) ** 2 == p
        assert gauss_sum(2, p) ** 2 == p

    @pytest.mark.parametrize("p", [7, 11, 19])
    def test_gauss_sum_squares_3mod4(self, p):
        assert gauss_sum(1, p) ** 2 == -p

    def test_gauss_sum_twist(self):
        for r in range(2, 13):
            assert gauss_sum(r, 13) == gauss_sum(1, 13) * legendre(r, 13)


class TestFactorMatrices:
    @pytest.mark.parametrize("p", [5, 13])
    def test_shapes_and_entries(self, p):
        V, D, U, G = cy.build_factor_matrices(p)
        n1 = (p + 1) // 2
        assert V.side == D.side == U.side == G.side == n1
        assert all(V[0, j] == 1 for j in range(n1))
        assert all(D[i, j] == 0 for i in range(n1) for j in range(n1) if i != j)
        assert all(U[i, j] == U[j, i] for i in range(n1) for j in range(n1))
        assert U[0, 0] == 0
        assert G[0, 0] == 1 and all(G[i, i] == zeta(p, i) * legendre(i, p) for i in range(1, n1))

    @pytest.mark.parametrize("p", [5, 13, 17, 29])
    def test_d_two_ways(self, p):
        assert cy._d_product(p) == cy._d_derivative(p)

    def test_requires_1mod4(self):
        with pytest.raises(ValueError):
            cy.build_factor_matrices(7)
        with pytest.raises(ValueError):
            cy.build_tilde_U(13)

    @pytest.mark.parametrize("p", [5, 13, 17, 29])
    def test_decomposition(self, p):
        assert cy.verify_decomposition(p)

    @pytest.mark.parametrize("p", [3, 7, 11, 19])
    def test_decomposition_3mod4(self, p):
        assert cy.verify_decomposition_3mod4(p)

    def test_dropping_scalar_breaks_identity(self):
        assert cy.decomposition_mismatch(13, scalar=CycloElem.one(13)) is not None
        assert cy.decomposition_mismatch(7, scalar=CycloElem.one(7)) is not None

    def test_plain_decomposition_against_full_products(self):
        # multiply the factors as full matrices to check the shortcut product
        p = 5
        V, D, U, _ = cy.build_factor_matrices(p)
        n1 = V.side

        def mm(A, B):
            return [[sum((A[i][k] * B[k][j] for k in range(n1)), CycloElem.zero(p))
                     for j in range(n1)] for i in range(n1)]

        prod = mm(mm(mm(mm(V.to_rows(), D.to_rows()), U.to_rows()), D.to_rows()), V.to_rows())
        s = gauss_sum(2, p) * zeta(p, (p - 1) // 4)
        C = build_chapman(p)
        assert all(s * prod[i][j] == C[i, j] for i in range(n1) for j in range(n1))

    @pytest.mark.parametrize("p", [5, 13])
    def test_determinant_multiplicativity(self, p):
        V, D, U, _ = cy.build_factor_matrices(p)
        n1 = V.side
        s = gauss_sum(2, p) * zeta(p, (p - 1) // 4)
        dV = field_det(V.to_field_matrix())
        dD = field_det(D.to_field_matrix())
        dU = field_det(U.to_field_matrix())
        assert s ** n1 * dV * dV * dD * dD * dU == det_bareiss(build_chapman(p))


class TestGaussProducts:
    @pytest.mark.parametrize("p", [5, 13, 17])
    def test_lemma_all_r(self, p):
        assert all(cy.verify_gauss_product(p, r) for r in range(1, p))

    def test_r_modulo_p(self):
        assert cy.verify_gauss_product(5, 6) and cy.verify_gauss_product(5, 1)

    def test_rejects_multiple_of_p(self):
        with pytest.raises(ValueError):
            cy.verify_gauss_product(13, 26)

    @pytest.mark.parametrize("p", [5, 13, 17, 29])
    def test_corollary(self, p):
        assert cy.verify_gauss_corollary(p) == {"half_powers": True, "one_plus_zeta": True}
        assert cy.verify_one_plus_zeta_products(p)

    def test_half_power_product_squares_to_p(self):
        for p in [5, 13, 17]:
            assert cy._half_zeta_difference_product(p) ** 2 == p


class TestSpecFactAndProducts:
    @pytest.mark.parametrize("p, a", [(5, 2), (13, 18)])
    def test_spec_fact(self, p, a):
        assert cy.verify_spec_fact(p, a)

    def test_spec_fact_wrong_constant(self):
        assert not cy.verify_spec_fact(5, 3)

    @pytest.mark.parametrize("p", [5, 13, 17, 29])
    def test_prod_identities(self, p):
        eps = fundamental_unit(p)
        h = class_number(p, eps)
        assert cy.verify_prod_identities(p, h, eps) == {"prod1": True, "prod2": True}

    @pytest.mark.parametrize("p", [5, 13])
    def test_prod_ratio(self, p):
        eps = fundamental_unit(p)
        h = class_number(p, eps)
        k = (2 - legendre(2, p)) * h
        plus, minus = cy._signed_products(p)
        assert plus / minus == cy.embed_quad(eps ** (2 * k))

    def test_wrong_class_number_fails(self):
        eps = fundamental_unit(13)
        assert not all(cy.verify_prod_identities(13, 3, eps).values())

    def test_embed_requires_1mod4(self):
        from evildet.quadfield import QuadElem
        with pytest.raises(ValueError):
            cy.embed_quad(QuadElem(2, 0, 7))


class TestW:
    @pytest.mark.parametrize("p", [5, 13])
    def test_structure(self, p):
        W = cy.build_W(p)
        n1 = W.side
        assert W[0, 0] == 0
        assert all(W[0, j] == 1 == W[j, 0] for j in range(1, n1))
        assert all(W[i, j] == W[j, i] for i in range(n1) for j in range(n1))

    @pytest.mark.parametrize("p", [5, 13, 17])
    def test_threeway(self, p):
        d1, d2, d3 = cy.detW_threeway(p)
        assert d1 == d2 == d3
        assert not d1.is_zero()

    @pytest.mark.parametrize("p", [5, 13, 17, 29])
    def test_closed_form_with_lemma_gives_a(self, p):
        # the specialised closed form carries the factor (P+ - P-)/2 = +-zeta^k a sqrt(p)
        a, _ = compute_a(p)
        assert cy.verify_spec_fact(p, a)
