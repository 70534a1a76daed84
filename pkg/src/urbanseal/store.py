"""The honest-but-curious storage service's database.

The store holds exactly what the protocol lets the storage service see:
re-encryption key histories, the road-side decryption key components of
each user, device boot material, encrypted sensed data, and ABE-sealed
keys. Writes of key components are guarded by a structural assertion so
a time-side component (the piece that would complete a key) can never
land here. The store persists to a directory with one file per object
class, using the fixed byte formats of the serde module.
"""

import json
import os
import struct
from dataclasses import dataclass, field

from . import serde
from .kpabe import Component
from .pre import AttributeVersionTable, ReencryptionKeyHistory


class SecurityInvariantError(Exception):
    """A write would give the storage service forbidden key material."""


@dataclass
class EsdRecord:
    generation: int      # which sealed generation of the day encrypted it
    counter: int         # data encryption counter at production time
    blob: bytes


@dataclass
class CssStore:
    group: object                      # BilinearGroup, for (de)serialization
    road_attrs: frozenset              # U_R; the only attrs allowed in writes
    rkh: dict = field(default_factory=dict)       # attr -> ReencryptionKeyHistory
    user_components: dict = field(default_factory=dict)  # user -> {attr: Component}
    boot_material: dict = field(default_factory=dict)    # device -> (day, blob)
    esd: dict = field(default_factory=dict)       # (device, day) -> [EsdRecord]
    ask: dict = field(default_factory=dict)       # (device, day) -> [Ciphertext]
    versions: AttributeVersionTable = field(default_factory=AttributeVersionTable)

    def init_histories(self):
        for attr in sorted(self.road_attrs):
            self.rkh[attr] = ReencryptionKeyHistory(attr)

    # -- guarded writes -------------------------------------------------

    def put_user_components(self, user, components):
        forbidden = set(components) - self.road_attrs
        if forbidden:
            raise SecurityInvariantError(
                "refusing non-road key components for %r: %s"
                % (user, sorted(forbidden)))
        self.user_components[user] = dict(components)

    def erase_user_components(self, user):
        self.user_components.pop(user, None)

    def append_reencryption_key(self, rk):
        self.rkh[rk.attr].append(rk)
        self.versions.bump(rk.attr)

    def put_boot_material(self, device, day, blob):
        self.boot_material[device] = (day, blob)

    def append_ask(self, device, day, ciphertext):
        self.ask.setdefault((device, day), []).append(ciphertext)
        return len(self.ask[(device, day)]) - 1

    def current_generation(self, device, day):
        return len(self.ask.get((device, day), [])) - 1

    def append_esd(self, device, day, record):
        self.esd.setdefault((device, day), []).append(record)

    # -- persistence: one file per object class -------------------------

    def save(self, directory):
        os.makedirs(directory, exist_ok=True)
        with open(os.path.join(directory, "rkh.bin"), "wb") as fh:
            for attr in sorted(self.rkh):
                _write_record(fh, serde.dump_rkh(self.rkh[attr], self.group))
        with open(os.path.join(directory, "user_components.bin"), "wb") as fh:
            for user in sorted(self.user_components):
                comps = self.user_components[user]
                body = _pack_str(user) + struct.pack(">I", len(comps))
                for attr in sorted(comps):
                    comp = comps[attr]
                    body += (_pack_str(attr) + struct.pack(">I", comp.version)
                             + _pack_bytes(self.group.g1_to_bytes(comp.value)))
                _write_record(fh, body)
        with open(os.path.join(directory, "boot.bin"), "wb") as fh:
            for device in sorted(self.boot_material):
                day, blob = self.boot_material[device]
                _write_record(fh, _pack_str(device) + struct.pack(">I", day)
                              + _pack_bytes(blob))
        with open(os.path.join(directory, "ask.bin"), "wb") as fh:
            for device, day in sorted(self.ask):
                for ct in self.ask[(device, day)]:
                    _write_record(fh, _pack_str(device) + struct.pack(">I", day)
                                  + _pack_bytes(serde.dump_ciphertext(ct, self.group)))
        with open(os.path.join(directory, "esd.bin"), "wb") as fh:
            for device, day in sorted(self.esd):
                for rec in self.esd[(device, day)]:
                    _write_record(fh, _pack_str(device)
                                  + struct.pack(">III", day, rec.generation,
                                                rec.counter)
                                  + _pack_bytes(rec.blob))
        with open(os.path.join(directory, "versions.json"), "w") as fh:
            json.dump(self.versions.versions, fh, sort_keys=True)

    @classmethod
    def load(cls, directory, group, road_attrs):
        store = cls(group, frozenset(road_attrs))
        for body in _read_records(os.path.join(directory, "rkh.bin")):
            rkh, _ = serde.load_rkh(body)
            store.rkh[rkh.attr] = rkh
        for body in _read_records(os.path.join(directory, "user_components.bin")):
            r = _Cursor(body)
            user = r.str()
            comps = {}
            for _ in range(r.u32()):
                attr = r.str()
                version = r.u32()
                comps[attr] = Component(group.g1_from_bytes(r.bytes()), version)
            store.put_user_components(user, comps)
        for body in _read_records(os.path.join(directory, "boot.bin")):
            r = _Cursor(body)
            device = r.str()
            store.boot_material[device] = (r.u32(), r.bytes())
        for body in _read_records(os.path.join(directory, "ask.bin")):
            r = _Cursor(body)
            device = r.str()
            day = r.u32()
            ct, _ = serde.load_ciphertext(r.bytes())
            store.ask.setdefault((device, day), []).append(ct)
        for body in _read_records(os.path.join(directory, "esd.bin")):
            r = _Cursor(body)
            device = r.str()
            day, generation, counter = struct.unpack(">III", r.raw(12))
            store.append_esd(device, day, EsdRecord(generation, counter, r.bytes()))
        with open(os.path.join(directory, "versions.json")) as fh:
            store.versions = AttributeVersionTable(
                {k: int(v) for k, v in json.load(fh).items()})
        return store


def _pack_bytes(b):
    return struct.pack(">I", len(b)) + b


def _pack_str(s):
    return _pack_bytes(s.encode("utf-8"))


def _write_record(fh, body):
    fh.write(struct.pack(">I", len(body)))
    fh.write(body)


def _read_records(path):
    if not os.path.exists(path):
        return
    with open(path, "rb") as fh:
        while True:
            head = fh.read(4)
            if not head:
                return
            (n,) = struct.unpack(">I", head)
            yield fh.read(n)


class _Cursor:
    def __init__(self, data):
        self.data = data
        self.pos = 0

    def raw(self, n):
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def u32(self):
        return struct.unpack(">I", self.raw(4))[0]

    def bytes(self):
        return self.raw(self.u32())

    def str(self):
        return self.bytes().decode("utf-8")
