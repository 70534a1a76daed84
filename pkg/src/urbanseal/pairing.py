"""Symmetric bilinear pairing over a supersingular curve.

The curve is y^2 = x^3 + x over F_p with p = h*r - 1, p = 3 mod 4, so the
group of rational points has order p + 1 = h*r and embedding degree 2.
G1 is the order-r subgroup of E(F_p), GT the order-r subgroup of F_p^2.
The pairing is the modified Tate pairing e(P, Q) = f_{r,P}(phi(Q))^((p^2-1)/r)
with the distortion map phi(x, y) = (-x, i*y).

Group elements: G1 points are (x, y) mpz tuples (None is the identity),
GT elements are (a, b) mpz tuples meaning a + b*i in F_p^2.
"""

from dataclasses import dataclass

import gmpy2
from gmpy2 import mpz


@dataclass(frozen=True)
class PairingParams:
    name: str
    p: object     # field prime, p = 3 mod 4
    r: object     # prime group order, r | p + 1
    h: object     # cofactor, h = (p + 1) / r
    g: tuple      # generator of G1


# r is a Solinas prime (2 non-top bits set) so the Miller loop is almost
# addition-free. 512-bit p / 160-bit r matches the classic 80-bit setting.
PARAMS_80 = PairingParams(
    name="ss512",
    p=mpz(6703903964971298549787012499102923063739684112759173063528353687321390854758539852513588450099898640474285367444881344489664916728574079999277425915070251),
    r=mpz((1 << 159) + (1 << 17) + 1),
    h=mpz(9173994463960286046443283581208347763186259956673124494950355357547691504353939232280074212440502746220332),
    g=(mpz(3423598570393807504174506866500286904471863263953886610895706512373019748250986233078622225932233151811597184170185953365699544649851892127399866996532202),
       mpz(6055129152105757627321200753861316011212241625682578477692062848586856506043323231477353441792133967628516509910937081743023571311750629405668049727707114)),
)

# Small parameters for fast unit tests only; offers no real security.
PARAMS_TOY = PairingParams(
    name="ss-toy",
    p=mpz(18446744683594909207),
    r=mpz((1 << 31) + (1 << 6) + 1),
    h=mpz(8589934616),
    g=(mpz(5512843042375641675), mpz(5763424772882171038)),
)

_BY_NAME = {PARAMS_80.name: PARAMS_80, PARAMS_TOY.name: PARAMS_TOY}


def params_by_name(name):
    try:
        return _BY_NAME[name]
    except KeyError:
        raise ValueError("unknown pairing parameter set: %r" % name)


def params_for_security(bits):
    """Smallest built-in parameter set reaching the requested level."""
    if bits <= 0:
        raise ValueError("security level must be positive")
    if bits <= 32:
        return PARAMS_TOY
    if bits <= 80:
        return PARAMS_80
    raise ValueError("no built-in parameters for %d-bit security" % bits)


class BilinearGroup:
    """Arithmetic for G1, GT and the pairing, bound to one parameter set."""

    def __init__(self, params):
        self.params = params
        self.p = params.p
        self.r = params.r
        self.h = params.h
        self.g = params.g
        self._fp_bytes = (params.p.bit_length() + 7) // 8
        self._gt_gen = None

    # -- scalars --------------------------------------------------------

    def random_scalar(self, rng):
        """Uniform in [1, r-1]."""
        return mpz(rng.randrange(1, int(self.r)))

    def scalar_inv(self, k):
        return gmpy2.invert(mpz(k), self.r)

    # -- F_p^2 helpers --------------------------------------------------

    def _fp2_mul(self, a, b):
        p = self.p
        a0, a1 = a
        b0, b1 = b
        t0 = a0 * b0
        t1 = a1 * b1
        t2 = (a0 + a1) * (b0 + b1)
        return ((t0 - t1) % p, (t2 - t0 - t1) % p)

    def _fp2_sqr(self, a):
        p = self.p
        a0, a1 = a
        return ((a0 - a1) * (a0 + a1) % p, (a0 * a1 << 1) % p)

    def _fp2_inv(self, a):
        p = self.p
        a0, a1 = a
        norm = (a0 * a0 + a1 * a1) % p
        inv = gmpy2.invert(norm, p)
        return (a0 * inv % p, -a1 * inv % p)

    def _fp2_conj(self, a):
        return (a[0], (-a[1]) % self.p)

    def _fp2_pow(self, a, e):
        result = (mpz(1), mpz(0))
        if e == 0:
            return result
        for bit in bin(int(e))[2:]:
            result = self._fp2_sqr(result)
            if bit == "1":
                result = self._fp2_mul(result, a)
        return result

    # -- GT -------------------------------------------------------------

    def gt_one(self):
        return (mpz(1), mpz(0))

    def gt_mul(self, a, b):
        return self._fp2_mul(a, b)

    def gt_inv(self, a):
        # GT elements are norm 1, so the inverse is the conjugate.
        return self._fp2_conj(a)

    def gt_exp(self, a, e):
        e = mpz(e) % self.r
        return self._fp2_pow(a, e)

    def gt_generator(self):
        if self._gt_gen is None:
            self._gt_gen = self.pair(self.g, self.g)
        return self._gt_gen

    def random_gt(self, rng):
        return self.gt_exp(self.gt_generator(), self.random_scalar(rng))

    # -- G1 (affine plus Jacobian scalar mult) --------------------------

    def g1_identity(self):
        return None

    def g1_neg(self, P):
        if P is None:
            return None
        return (P[0], (-P[1]) % self.p)

    def g1_add(self, P, Q):
        if P is None:
            return Q
        if Q is None:
            return P
        p = self.p
        x1, y1 = P
        x2, y2 = Q
        if x1 == x2:
            if (y1 + y2) % p == 0:
                return None
            lam = (3 * x1 * x1 + 1) * gmpy2.invert((y1 << 1) % p, p) % p
        else:
            lam = (y2 - y1) * gmpy2.invert((x2 - x1) % p, p) % p
        x3 = (lam * lam - x1 - x2) % p
        y3 = (lam * (x1 - x3) - y1) % p
        return (x3, y3)

    def g1_mul(self, P, k):
        k = mpz(k) % self.r
        if P is None or k == 0:
            return None
        p = self.p
        # Jacobian coordinates, mixed addition with the affine base point.
        xq, yq = P
        X, Y, Z = xq, yq, mpz(1)
        for bit in bin(int(k))[3:]:
            # double (curve coefficient a = 1)
            YY = Y * Y % p
            S = (X * YY << 2) % p
            ZZ = Z * Z % p
            M = (3 * X * X + ZZ * ZZ) % p
            X2 = (M * M - 2 * S) % p
            Y2 = (M * (S - X2) - (YY * YY << 3)) % p
            Z2 = ((Y * Z) << 1) % p
            X, Y, Z = X2, Y2, Z2
            if bit == "1":
                if Z == 0:
                    X, Y, Z = xq, yq, mpz(1)
                    continue
                # mixed add (X,Y,Z) + (xq,yq)
                ZZ = Z * Z % p
                U2 = xq * ZZ % p
                S2 = yq * ZZ * Z % p
                if U2 == X:
                    if (S2 + Y) % p == 0:
                        X, Y, Z = mpz(0), mpz(1), mpz(0)
                        continue
                    # doubling case, rare
                    YY = Y * Y % p
                    S = (X * YY << 2) % p
                    ZZq = Z * Z % p
                    M = (3 * X * X + ZZq * ZZq) % p
                    X2 = (M * M - 2 * S) % p
                    Y2 = (M * (S - X2) - (YY * YY << 3)) % p
                    Z2 = ((Y * Z) << 1) % p
                    X, Y, Z = X2, Y2, Z2
                    continue
                H = (U2 - X) % p
                Rr = (S2 - Y) % p
                HH = H * H % p
                HHH = HH * H % p
                V = X * HH % p
                X2 = (Rr * Rr - HHH - 2 * V) % p
                Y2 = (Rr * (V - X2) - Y * HHH) % p
                Z2 = Z * H % p
                X, Y, Z = X2, Y2, Z2
        if Z == 0:
            return None
        zinv = gmpy2.invert(Z, p)
        zinv2 = zinv * zinv % p
        return (X * zinv2 % p, Y * zinv2 * zinv % p)

    def g1_is_valid(self, P):
        if P is None:
            return True
        x, y = P
        return (y * y - (x * x * x + x)) % self.p == 0

    # -- pairing --------------------------------------------------------

    def pair(self, P, Q):
        return self.pair_product([(P, Q)])

    def pair_product(self, pairs):
        """prod_k e(P_k, Q_k) with a shared Miller loop and final exponentiation."""
        pairs = [(P, Q) for P, Q in pairs if P is not None and Q is not None]
        if not pairs:
            return self.gt_one()
        p = self.p
        f = (mpz(1), mpz(0))
        # per-pair state: running point T and the Q coordinates; a line
        # l(X, Y) = Y - y1 - lam*(X - x1) evaluated at phi(Q) = (-xQ, i*yQ)
        # gives (lam*(xQ + x1) - y1) + i*yQ.
        state = [[mpz(P[0]), mpz(P[1]), P, mpz(Q[0]), mpz(Q[1])] for P, Q in pairs]
        for bit in bin(int(self.r))[3:]:
            f = self._fp2_sqr(f)
            for st in state:
                tx, ty, P, qx, qy = st
                if ty == 0:
                    continue
                # tangent line at T, evaluated at phi(Q); vertical lines are
                # in F_p and vanish under the final exponentiation.
                lam = (3 * tx * tx + 1) * gmpy2.invert((ty << 1) % p, p) % p
                ell = ((lam * (qx + tx) - ty) % p, qy)
                f = self._fp2_mul(f, ell)
                x3 = (lam * lam - 2 * tx) % p
                st[1] = (lam * (tx - x3) - ty) % p
                st[0] = x3
            if bit == "1":
                for st in state:
                    tx, ty, P, qx, qy = st
                    px, py = P
                    if tx == px:
                        # vertical chord (T = -P): contributes only a
                        # subfield factor, skipped.
                        st[0], st[1] = mpz(0), mpz(0)
                        continue
                    lam = (ty - py) * gmpy2.invert((tx - px) % p, p) % p
                    ell = ((lam * (qx + px) - py) % p, qy)
                    f = self._fp2_mul(f, ell)
                    x3 = (lam * lam - tx - px) % p
                    st[1] = (lam * (px - x3) - py) % p
                    st[0] = x3
        # final exponentiation: (p^2 - 1)/r = (p - 1) * h
        f = self._fp2_mul(self._fp2_conj(f), self._fp2_inv(f))
        return self._fp2_pow(f, self.h)

    # -- serialization --------------------------------------------------

    def g1_to_bytes(self, P):
        n = self._fp_bytes
        if P is None:
            return b"\x00" * (2 * n)
        return int(P[0]).to_bytes(n, "big") + int(P[1]).to_bytes(n, "big")

    def g1_from_bytes(self, data):
        n = self._fp_bytes
        if len(data) != 2 * n:
            raise ValueError("bad G1 encoding length")
        x = mpz(int.from_bytes(data[:n], "big"))
        y = mpz(int.from_bytes(data[n:], "big"))
        if x == 0 and y == 0:
            return None
        P = (x, y)
        if not self.g1_is_valid(P):
            raise ValueError("point not on curve")
        return P

    def gt_to_bytes(self, a):
        n = self._fp_bytes
        return int(a[0]).to_bytes(n, "big") + int(a[1]).to_bytes(n, "big")

    def gt_from_bytes(self, data):
        n = self._fp_bytes
        if len(data) != 2 * n:
            raise ValueError("bad GT encoding length")
        return (mpz(int.from_bytes(data[:n], "big")),
                mpz(int.from_bytes(data[n:], "big")))
