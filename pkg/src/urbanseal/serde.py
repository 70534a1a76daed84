"""Fixed byte-level serialization for key material and ciphertexts.

Layout: 4-byte magic, format version byte, object tag byte, then the
pairing parameter set name and the object body. All variable-size fields
are length-prefixed (4-byte big-endian); group elements use the fixed
encodings of the pairing module. The attribute names embedded here are
part of the on-disk format.
"""

import struct

from gmpy2 import mpz

from .pairing import BilinearGroup, params_by_name
from .kpabe import (Attr, Ciphertext, Component, DecryptionKey, Gate,
                    MasterKey, PublicParams, Universe)
from .pre import ReencryptionKey, ReencryptionKeyHistory

MAGIC = b"USL1"
FORMAT_VERSION = 1

TAG_MASTER_KEY = 0x01
TAG_PUBLIC_PARAMS = 0x02
TAG_CIPHERTEXT = 0x03
TAG_DECRYPTION_KEY = 0x04
TAG_RKH = 0x05


class FormatError(Exception):
    pass


class _Writer:
    def __init__(self):
        self.parts = []

    def bytes(self, b):
        self.parts.append(struct.pack(">I", len(b)))
        self.parts.append(b)

    def raw(self, b):
        self.parts.append(b)

    def u32(self, n):
        self.parts.append(struct.pack(">I", n))

    def str(self, s):
        self.bytes(s.encode("utf-8"))

    def int(self, n):
        n = int(n)
        self.bytes(n.to_bytes((n.bit_length() + 7) // 8 or 1, "big"))

    def getvalue(self):
        return b"".join(self.parts)


class _Reader:
    def __init__(self, data):
        self.data = data
        self.pos = 0

    def raw(self, n):
        if self.pos + n > len(self.data):
            raise FormatError("truncated record")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def u32(self):
        return struct.unpack(">I", self.raw(4))[0]

    def bytes(self):
        return self.raw(self.u32())

    def str(self):
        return self.bytes().decode("utf-8")

    def int(self):
        return mpz(int.from_bytes(self.bytes(), "big"))

    def done(self):
        if self.pos != len(self.data):
            raise FormatError("trailing bytes in record")


def _header(tag, group):
    w = _Writer()
    w.raw(MAGIC)
    w.raw(bytes([FORMAT_VERSION, tag]))
    w.str(group.params.name)
    return w


def _open(data, expected_tag):
    r = _Reader(data)
    if r.raw(4) != MAGIC:
        raise FormatError("bad magic")
    version, tag = r.raw(2)
    if version != FORMAT_VERSION:
        raise FormatError("unsupported format version %d" % version)
    if tag != expected_tag:
        raise FormatError("unexpected object tag 0x%02x" % tag)
    group = BilinearGroup(params_by_name(r.str()))
    return r, group


def _write_universe(w, universe):
    for part in (universe.road, universe.time):
        w.u32(len(part))
        for attr in sorted(part):
            w.str(attr)


def _read_universe(r):
    parts = []
    for _ in range(2):
        parts.append(frozenset(r.str() for _ in range(r.u32())))
    return Universe(parts[0], parts[1])


def _write_components(w, comps, encode):
    w.u32(len(comps))
    for attr in sorted(comps):
        comp = comps[attr]
        w.str(attr)
        w.u32(comp.version)
        w.bytes(encode(comp.value))


def _read_components(r, decode):
    out = {}
    for _ in range(r.u32()):
        attr = r.str()
        version = r.u32()
        out[attr] = Component(decode(r.bytes()), version)
    return out


def _write_policy(w, node):
    if isinstance(node, Attr):
        w.raw(b"L")
        w.str(node.name)
    else:
        w.raw(b"A" if node.op == "and" else b"O")
        w.u32(len(node.children))
        for child in node.children:
            _write_policy(w, child)


def _read_policy(r):
    tag = r.raw(1)
    if tag == b"L":
        return Attr(r.str())
    if tag in (b"A", b"O"):
        n = r.u32()
        children = tuple(_read_policy(r) for _ in range(n))
        return Gate("and" if tag == b"A" else "or", children)
    raise FormatError("bad policy node tag %r" % tag)


# -- public API ---------------------------------------------------------

def dump_master_key(mk, group):
    w = _header(TAG_MASTER_KEY, group)
    w.int(mk.y)
    _write_universe(w, mk.universe)
    _write_components(w, mk.t, _int_bytes)
    return w.getvalue()


def _int_bytes(n):
    n = int(n)
    return n.to_bytes((n.bit_length() + 7) // 8 or 1, "big")


def load_master_key(data):
    r, group = _open(data, TAG_MASTER_KEY)
    y = r.int()
    universe = _read_universe(r)
    t = _read_components(r, lambda b: mpz(int.from_bytes(b, "big")))
    r.done()
    return MasterKey(y, t, universe), group


def dump_public_params(params):
    group = params.group
    w = _header(TAG_PUBLIC_PARAMS, group)
    w.bytes(group.gt_to_bytes(params.Y))
    _write_universe(w, params.universe)
    _write_components(w, params.T, group.g1_to_bytes)
    return w.getvalue()


def load_public_params(data):
    r, group = _open(data, TAG_PUBLIC_PARAMS)
    Y = group.gt_from_bytes(r.bytes())
    universe = _read_universe(r)
    T = _read_components(r, group.g1_from_bytes)
    r.done()
    return PublicParams(Y, T, universe, group)


def dump_ciphertext(ct, group):
    w = _header(TAG_CIPHERTEXT, group)
    w.bytes(group.gt_to_bytes(ct.e_tilde))
    _write_components(w, ct.e, group.g1_to_bytes)
    return w.getvalue()


def load_ciphertext(data):
    r, group = _open(data, TAG_CIPHERTEXT)
    e_tilde = group.gt_from_bytes(r.bytes())
    e = _read_components(r, group.g1_from_bytes)
    r.done()
    return Ciphertext(frozenset(e), e_tilde, e), group


def dump_decryption_key(dk, group):
    w = _header(TAG_DECRYPTION_KEY, group)
    _write_policy(w, dk.policy)
    _write_components(w, dk.dk, group.g1_to_bytes)
    return w.getvalue()


def load_decryption_key(data):
    r, group = _open(data, TAG_DECRYPTION_KEY)
    policy = _read_policy(r)
    dk = _read_components(r, group.g1_from_bytes)
    r.done()
    return DecryptionKey(policy, frozenset(dk), dk), group


def dump_rkh(rkh, group):
    w = _header(TAG_RKH, group)
    w.str(rkh.attr)
    w.u32(len(rkh.keys))
    for rk in rkh.keys:
        w.u32(rk.from_version)
        w.int(rk.factor)
    return w.getvalue()


def load_rkh(data):
    r, group = _open(data, TAG_RKH)
    attr = r.str()
    rkh = ReencryptionKeyHistory(attr)
    for _ in range(r.u32()):
        rkh.append(ReencryptionKey(attr, r.u32(), r.int()))
    r.done()
    return rkh, group
