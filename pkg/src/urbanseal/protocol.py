"""The four actors and the six system procedures.

A System wires together the trusted authority (key generation, daily
sealing, revocation), the honest-but-curious storage service, the sensing
devices (symmetric crypto only), and the users. Actors exchange messages
over an in-process fabric that records a transcript for adversary tests;
every authority message carries (payload, current date, signature) and
receivers reject bad signatures and stale dates. A JSON-lines event log
makes whole runs replayable.
"""

import json
import struct
from dataclasses import dataclass, field

from . import kpabe, pre, serde, symcrypto
from .attrspace import (build_universe, label_for_device, policy_for_user,
                        release_policy, revocation_attribute_set)
from .kpabe import Component, VersionMismatchError
from .store import CssStore, EsdRecord
from .symcrypto import IntegrityError


class StaleDateError(Exception):
    """A message's date does not match the receiver's clock."""


class UnknownObjectError(Exception):
    pass


@dataclass
class Clock:
    day: int = 1

    def advance(self, days=1):
        self.day += days


@dataclass
class SystemConfig:
    city: object
    rep: object               # attrspace.Representation
    time: object              # attrspace.TimeConfig
    security_level: int = 80
    seed: int = 0


@dataclass
class Message:
    sender: str
    recipient: str
    kind: str
    fields: dict


class Fabric:
    """Synchronous in-process message delivery with a recording tap."""

    def __init__(self):
        self.handlers = {}
        self.transcript = []
        self.intercept = None      # optional fn(Message) -> Message, for tests

    def register(self, name, handler):
        self.handlers[name] = handler

    def send(self, sender, recipient, kind, **fields):
        msg = Message(sender, recipient, kind, fields)
        if self.intercept is not None:
            msg = self.intercept(msg)
        self.transcript.append(msg)
        return self.handlers[recipient](msg)


def _date_bytes(day):
    return struct.pack(">I", day)


def _pack_components(group, comps):
    parts = [struct.pack(">I", len(comps))]
    for attr in sorted(comps):
        comp = comps[attr]
        name = attr.encode("utf-8")
        parts.append(struct.pack(">I", len(name)) + name)
        parts.append(struct.pack(">I", comp.version))
        parts.append(group.g1_to_bytes(comp.value))
    return b"".join(parts)


def _unpack_components(group, data):
    pos = 4
    (count,) = struct.unpack(">I", data[:4])
    out = {}
    width = 2 * group._fp_bytes
    for _ in range(count):
        (n,) = struct.unpack(">I", data[pos:pos + 4]); pos += 4
        attr = data[pos:pos + n].decode("utf-8"); pos += n
        (version,) = struct.unpack(">I", data[pos:pos + 4]); pos += 4
        value = group.g1_from_bytes(data[pos:pos + width]); pos += width
        out[attr] = Component(value, version)
    return out


class TtpActor:
    """Holds the master key, the signing key, and all device long-term keys."""

    def __init__(self, mk, params, layout, clock, rng):
        self.mk = mk
        self.params = params
        self.layout = layout
        self.clock = clock
        self.rng = rng
        self.signer = symcrypto.Signer(rng)
        self.device_keys = {}          # device id -> K_LT (preloaded)
        self.user_boxes = {}           # user id -> X25519 public bytes
        self.user_policies = {}        # user id -> access tree

    def sign_dated(self, body):
        date = self.clock.day
        return date, self.signer.sign(body + _date_bytes(date))


class CssActor:
    """Storage service: verifies authority messages, serves data requests,
    performs lazy proxy re-encryption."""

    def __init__(self, store, ttp_verify_key, clock):
        self.store = store
        self.ttp_verify_key = ttp_verify_key
        self.clock = clock

    def _check(self, body, date, signature):
        symcrypto.verify_signature(self.ttp_verify_key,
                                   body + _date_bytes(date), signature)
        if date != self.clock.day:
            raise StaleDateError("message dated day %d, today is day %d"
                                 % (date, self.clock.day))

    def handle(self, msg):
        return getattr(self, "_on_" + msg.kind)(msg.fields)

    def _on_store_key_components(self, f):
        body = f["user"].encode("utf-8") + f["components"]
        self._check(body, f["date"], f["signature"])
        comps = _unpack_components(self.store.group, f["components"])
        self.store.put_user_components(f["user"], comps)
        return True

    def _on_seal_upload(self, f):
        body = (f["device"].encode("utf-8") + f["ask"] + f["boot"])
        self._check(body, f["date"], f["signature"])
        ct, _ = serde.load_ciphertext(f["ask"])
        generation = self.store.append_ask(f["device"], f["date"], ct)
        self.store.put_boot_material(f["device"], f["date"], f["boot"])
        return generation

    def _on_revoke(self, f):
        body = f["user"].encode("utf-8") + f["rk_blob"]
        self._check(body, f["date"], f["signature"])
        for rk in _unpack_rks(f["rk_blob"]):
            self.store.append_reencryption_key(rk)
        self.store.erase_user_components(f["user"])
        return True

    def _on_fetch_boot(self, f):
        device = f["device"]
        if device not in self.store.boot_material:
            raise UnknownObjectError("no boot material for %r" % device)
        day, blob = self.store.boot_material[device]
        return day, blob, self.store.current_generation(device, day)

    def _on_store_esd(self, f):
        self.store.append_esd(f["device"], f["day"],
                              EsdRecord(f["generation"], f["counter"], f["blob"]))
        return True

    def _on_consume(self, f):
        device, day, index = f["device"], f["day"], f["index"]
        records = self.store.esd.get((device, day))
        if not records or not 0 <= index < len(records):
            raise UnknownObjectError("no item %d for device %r on day %d"
                                     % (index, device, day))
        record = records[index]
        ct = self.store.ask[(device, day)][record.generation]
        group = self.store.group
        # lazy re-encryption of stale ciphertext components
        for attr, comp in list(ct.e.items()):
            rkh = self.store.rkh.get(attr)
            if rkh is not None and comp.version < rkh.current_version:
                ct.e[attr] = pre.update_ciphertext_component(attr, comp, rkh, group)
        # lazy refresh of the requesting user's stored key components
        refreshed = {}
        stored = self.store.user_components.get(f["user"])
        if stored is not None:
            for attr, comp in stored.items():
                rkh = self.store.rkh[attr]
                if comp.version < rkh.current_version:
                    comp = pre.update_key_component(attr, comp, rkh, group)
                    stored[attr] = comp
                refreshed[attr] = comp
        return refreshed, ct, record


class DeviceActor:
    """A sensing device: symmetric operations only."""

    def __init__(self, device_id, k_lt, placement, clock, rng):
        self.device_id = device_id
        self.k_lt = k_lt
        self.placement = placement     # (street id, segment)
        self.clock = clock
        self.rng = rng
        self.dek = None
        self.counter = 0
        self.generation = -1

    def boot(self, day, blob, generation):
        # MAC (the AEAD tag) and date freshness, then reset the chain
        dek0 = symcrypto.aead_open(self.k_lt, blob, _date_bytes(day))
        if day != self.clock.day:
            raise StaleDateError("boot material dated day %d, today is %d"
                                 % (day, self.clock.day))
        self.dek = dek0
        self.counter = 0
        self.generation = generation

    def encrypt_item(self, sensed_data):
        if self.dek is None:
            raise RuntimeError("device %r not booted" % self.device_id)
        aad = self._aad(self.clock.day, self.generation, self.counter)
        blob = symcrypto.aead_seal(self.dek, sensed_data, aad, self.rng)
        record = (self.clock.day, self.generation, self.counter, blob)
        # advance the chain and destroy the old key
        self.dek = symcrypto.chain_next(self.dek)
        self.counter += 1
        return record

    def _aad(self, day, generation, counter):
        return self.device_id.encode("utf-8") + struct.pack(
            ">III", day, generation, counter)


class UserActor:
    def __init__(self, user_id, clock, rng, ttp_verify_key, params):
        self.user_id = user_id
        self.clock = clock
        self.box = symcrypto.SealedBox(rng)
        self.ttp_verify_key = ttp_verify_key
        self.params = params
        self.dk = None

    def accept_key(self, sealed_blob):
        plain = self.box.open(sealed_blob)
        (n,) = struct.unpack(">I", plain[:4])
        body = plain[4:4 + n]
        (date,) = struct.unpack(">I", plain[4 + n:8 + n])
        signature = plain[8 + n:]
        symcrypto.verify_signature(self.ttp_verify_key,
                                   body + _date_bytes(date), signature)
        if date != self.clock.day:
            raise StaleDateError("key message dated day %d, today is %d"
                                 % (date, self.clock.day))
        self.dk, _ = serde.load_decryption_key(body)

    def merge_components(self, refreshed):
        for attr, comp in refreshed.items():
            if attr in self.dk.dk:
                self.dk.dk[attr] = comp

    def open_item(self, refreshed, ct, record, device_id, day):
        """Returns the sensed data, or None when not authorized."""
        self.merge_components(refreshed)
        try:
            payload = kpabe.decrypt(ct, self.dk, self.params)
        except VersionMismatchError:
            return None
        if payload is None:
            return None
        dek0 = symcrypto.derive_dek(self.params.group.gt_to_bytes(payload))
        dek = symcrypto.chain_at(dek0, record.counter)
        aad = device_id.encode("utf-8") + struct.pack(
            ">III", day, record.generation, record.counter)
        return symcrypto.aead_open(dek, record.blob, aad)


def _pack_rks(rks):
    parts = [struct.pack(">I", len(rks))]
    for rk in rks:
        name = rk.attr.encode("utf-8")
        factor = int(rk.factor)
        fb = factor.to_bytes((factor.bit_length() + 7) // 8 or 1, "big")
        parts.append(struct.pack(">I", len(name)) + name)
        parts.append(struct.pack(">II", rk.from_version, len(fb)) + fb)
    return b"".join(parts)


def _unpack_rks(data):
    (count,) = struct.unpack(">I", data[:4])
    pos = 4
    out = []
    for _ in range(count):
        (n,) = struct.unpack(">I", data[pos:pos + 4]); pos += 4
        attr = data[pos:pos + n].decode("utf-8"); pos += n
        fromv, m = struct.unpack(">II", data[pos:pos + 8]); pos += 8
        factor = int.from_bytes(data[pos:pos + m], "big"); pos += m
        out.append(pre.ReencryptionKey(attr, fromv, factor))
    return out


class System:
    """Harness owning the clock, the fabric, and all actor states."""

    def __init__(self, config):
        import random
        self.config = config
        self.rng = random.Random(config.seed)
        self.clock = Clock(1)
        self.fabric = Fabric()
        self.events = []
        self.layout = build_universe(config.city, config.rep, config.time)
        mk, params = kpabe.setup(self.layout.universe,
                                 config.security_level, self.rng)
        self.params = params
        self.ttp = TtpActor(mk, params, self.layout, self.clock, self.rng)
        store = CssStore(params.group, self.layout.universe.road)
        store.init_histories()
        self.css = CssActor(store, self.ttp.signer.public_bytes(), self.clock)
        self.fabric.register("css", self.css.handle)
        self.devices = {}
        for n, placement in enumerate(config.city.devices):
            did = "d%d" % n
            k_lt = symcrypto.random_key(self.rng)
            self.ttp.device_keys[did] = k_lt
            self.devices[did] = DeviceActor(did, k_lt, placement,
                                            self.clock, self.rng)
        self.users = {}

    # -- procedures -----------------------------------------------------

    def register_user(self, user_id):
        user = UserActor(user_id, self.clock, self.rng,
                         self.ttp.signer.public_bytes(), self.params)
        self.users[user_id] = user
        self.ttp.user_boxes[user_id] = user.box.public_bytes()
        self.fabric.register(
            user_id,
            lambda msg, u=user: u.accept_key(msg.fields["sealed"]))
        return user

    def distribute_key(self, user_id, spec):
        """Issue and deliver a decryption key for the given authorization."""
        self._log("distribute_key", user=user_id, spec={
            "intervals": list(spec.intervals),
            "valid_from": spec.valid_from, "valid_to": spec.valid_to})
        if user_id not in self.ttp.user_boxes:
            raise KeyError("user %r not registered" % user_id)
        policy = policy_for_user(self.layout, spec)
        dk = kpabe.keygen(self.ttp.mk, policy, self.params, self.rng)
        self.ttp.user_policies[user_id] = policy
        # confidential, signed, dated delivery to the user
        body = serde.dump_decryption_key(dk, self.params.group)
        date, signature = self.ttp.sign_dated(body)
        plain = (struct.pack(">I", len(body)) + body
                 + _date_bytes(date) + signature)
        sealed = symcrypto.seal_to(self.ttp.user_boxes[user_id], plain, self.rng)
        self.fabric.send("ttp", user_id, "key_delivery", sealed=sealed)
        # road-side components to the storage service
        road = {attr: comp for attr, comp in dk.dk.items()
                if attr in self.layout.universe.road}
        blob = _pack_components(self.params.group, road)
        body = user_id.encode("utf-8") + blob
        date, signature = self.ttp.sign_dated(body)
        self.fabric.send("ttp", "css", "store_key_components",
                         user=user_id, components=blob,
                         date=date, signature=signature)
        return self.users[user_id]

    def seal_day(self):
        """Fresh sealed keys and boot material for every device, then boot."""
        self._log("seal_day")
        self._seal()

    def _seal(self):
        day = self.clock.day
        group = self.params.group
        for did in sorted(self.devices):
            device = self.devices[did]
            payload = group.random_gt(self.rng)
            label = label_for_device(self.layout, device.placement[0],
                                     device.placement[1], day)
            ask = kpabe.encrypt(payload, label.gamma, self.params, self.rng)
            dek0 = symcrypto.derive_dek(group.gt_to_bytes(payload))
            boot = symcrypto.aead_seal(self.ttp.device_keys[did], dek0,
                                       _date_bytes(day), self.rng)
            ask_bytes = serde.dump_ciphertext(ask, group)
            body = did.encode("utf-8") + ask_bytes + boot
            date, signature = self.ttp.sign_dated(body)
            self.fabric.send("ttp", "css", "seal_upload", device=did,
                             ask=ask_bytes, boot=boot,
                             date=date, signature=signature)
        for did in sorted(self.devices):
            device = self.devices[did]
            day_got, blob, generation = self.fabric.send(
                did, "css", "fetch_boot", device=did)
            device.boot(day_got, blob, generation)

    def produce_data(self, device_id, sensed_data):
        self._log("produce_data", device=device_id, sd=sensed_data.hex())
        device = self.devices[device_id]
        day, generation, counter, blob = device.encrypt_item(sensed_data)
        self.fabric.send(device_id, "css", "store_esd", device=device_id,
                         day=day, generation=generation, counter=counter,
                         blob=blob)
        return counter

    def consume_data(self, user_id, device_id, day, index):
        """Returns the sensed data, or None when the user is not authorized."""
        self._log("consume_data", user=user_id, device=device_id,
                  day=day, index=index)
        user = self.users[user_id]
        refreshed, ct, record = self.fabric.send(
            user_id, "css", "consume", user=user_id, device=device_id,
            day=day, index=index)
        return user.open_item(refreshed, ct, record, device_id, day)

    def revoke_key(self, user_id):
        """Version-bump the key's road attributes and re-seal the day."""
        self._log("revoke_key", user=user_id)
        policy = self.ttp.user_policies.pop(user_id)
        mu = revocation_attribute_set(self.layout, policy)
        rks = [pre.update_attribute(attr, self.ttp.mk, self.params, self.rng)
               for attr in sorted(mu)]
        blob = _pack_rks(rks)
        body = user_id.encode("utf-8") + blob
        date, signature = self.ttp.sign_dated(body)
        self.fabric.send("ttp", "css", "revoke", user=user_id, rk_blob=blob,
                         date=date, signature=signature)
        release_policy(self.layout, policy)
        # the revocation-triggered seal appends a fresh sealed generation
        self._seal()

    def advance_day(self, days=1):
        self._log("advance_day", days=days)
        self.clock.advance(days)

    # -- event log ------------------------------------------------------

    def _log(self, name, **params):
        self.events.append({"event": name, "day": self.clock.day, **params})

    def save_trace(self, path):
        with open(path, "w") as fh:
            for event in self.events:
                fh.write(json.dumps(event, sort_keys=True) + "\n")


def setup_system(config):
    """Initialize a complete system (universe, keys, empty histories)."""
    return System(config)


def replay_trace(path, config):
    """Re-run a recorded event log against a fresh system."""
    from .attrspace import PolicySpec
    system = System(config)
    with open(path) as fh:
        for line in fh:
            event = json.loads(line)
            kind = event["event"]
            if kind == "distribute_key":
                spec = event["spec"]
                if event["user"] not in system.users:
                    system.register_user(event["user"])
                system.distribute_key(event["user"], PolicySpec(
                    tuple(tuple(iv) for iv in spec["intervals"]),
                    spec["valid_from"], spec["valid_to"]))
            elif kind == "seal_day":
                system.seal_day()
            elif kind == "produce_data":
                system.produce_data(event["device"], bytes.fromhex(event["sd"]))
            elif kind == "consume_data":
                system.consume_data(event["user"], event["device"],
                                    event["day"], event["index"])
            elif kind == "revoke_key":
                system.revoke_key(event["user"])
            elif kind == "advance_day":
                system.advance_day(event["days"])
            else:
                raise ValueError("unknown trace event %r" % kind)
    return system
