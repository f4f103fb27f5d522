"""Deterministic store fixtures: a usage-stats population, a login-ready demo
set, and a synthetic download history."""
from __future__ import annotations

import datetime
import time

import numpy as np

from .analytics import record_download
from .images import RgbImage, encode_png
from .registry import ROLE_AGRONOMIST, ROLE_FARMER, ROLE_MERCHANT
from .store import BlobStore, DocumentStore, new_id

# direct-write fixtures get an unusable credential on purpose: these accounts
# exist to be counted, not logged into, and real hashing for hundreds of
# users would dominate seeding time
_FIXTURE_CREDENTIAL = {"salt": "00" * 16, "log_n": 4, "r": 8, "p": 1,
                       "hash": "00" * 32}

USAGE_COUNTS = {
    "farmers": 146, "agronomists": 9, "merchants": 12,
    "chats": 171, "samples": 38, "products": 65,
    "messages": 1350, "farms": 80, "crops": 275,
}

_CROP_KINDS = ("orange", "tangerine", "tahiti lime")


def _mk_user(store, name, role, now):
    user_id = new_id()
    digits = sum(ord(c) * (i + 1) for i, c in enumerate(name)) % 10**7
    store.put("users", user_id, {
        "name": name, "role": role,
        "contact": {"phone": f"+55 51 9{digits:07d}", "locality": "Vale do Cai"},
        "credential": dict(_FIXTURE_CREDENTIAL),
        "created_at": now,
    }, 0)
    store.put("usernames", name.lower(), {"user_id": user_id}, 0)
    return user_id


def seed_usage(store: DocumentStore, blobs: BlobStore, clock=time.time) -> dict:
    """Populate the store so every usage-stats counter lands on a fixed value
    (146/9/12 users, 171 chats, 38 samples, 65 products, 1350 messages,
    80 farms, 275 crops)."""
    now = float(clock())
    farmers = [_mk_user(store, f"farmer{i:03d}", ROLE_FARMER, now)
               for i in range(USAGE_COUNTS["farmers"])]
    agronomists = [_mk_user(store, f"agronomist{i:02d}", ROLE_AGRONOMIST, now)
                   for i in range(USAGE_COUNTS["agronomists"])]
    merchants = [_mk_user(store, f"merchant{i:02d}", ROLE_MERCHANT, now)
                 for i in range(USAGE_COUNTS["merchants"])]

    farms = []
    for i in range(USAGE_COUNTS["farms"]):
        farm_id = new_id()
        store.put("farms", farm_id, {
            "farmer_id": farmers[i % len(farmers)], "name": f"farm {i}",
            "locality": "Vale do Cai", "created_at": now}, 0)
        farms.append((farm_id, farmers[i % len(farmers)]))

    crops = []
    for i in range(USAGE_COUNTS["crops"]):
        farm_id, farmer_id = farms[i % len(farms)]
        crop_id = new_id()
        store.put("crops", crop_id, {
            "farm_id": farm_id, "farmer_id": farmer_id,
            "kind": _CROP_KINDS[i % len(_CROP_KINDS)], "planted_at": "2023-09-01",
            "notes": "", "created_at": now}, 0)
        crops.append((crop_id, farmer_id))

    leaf = blobs.put(encode_png(RgbImage(
        np.full((8, 8, 3), (60, 140, 50), dtype=np.uint8))))
    for i in range(USAGE_COUNTS["samples"]):
        crop_id, farmer_id = crops[(i * 7) % len(crops)]
        store.put("samples", new_id(), {
            "farmer_id": farmer_id, "crop_id": crop_id,
            "image_ref": leaf, "submitted_at": now}, 0)

    for i in range(USAGE_COUNTS["products"]):
        store.put("listings", new_id(), {
            "farmer_id": farmers[i % len(farmers)],
            "product": f"{_CROP_KINDS[i % len(_CROP_KINDS)]} lot {i}",
            "quantity": 100 + i, "unit": "kg", "description": "",
            "photo_refs": [], "crop_id": "",
            "starting_price": 10000 + 100 * i,
            "ends_at": now + 30 * 86400, "created_at": now,
            "status": "open", "offers": []}, 0)

    # unique unordered pairs: every farmer talks to an agronomist, the first
    # 25 also talk to a merchant
    pairs = [(farmers[i], agronomists[i % len(agronomists)]) for i in range(len(farmers))]
    pairs += [(farmers[i], merchants[i % len(merchants)])
              for i in range(USAGE_COUNTS["chats"] - len(pairs))]
    total_messages = USAGE_COUNTS["messages"]
    base, extra = divmod(total_messages, len(pairs))
    for t, (a, b) in enumerate(pairs):
        count = base + (1 if t < extra else 0)
        messages = [{"seq": s + 1, "sender_id": (a, b)[s % 2],
                     "body": f"message {s + 1}", "sent_at": now + s}
                    for s in range(count)]
        tid = new_id()
        store.put("threads", tid, {
            "participants": sorted((a, b)), "created_at": now,
            "messages": messages}, 0)
    return {"farmers": len(farmers), "agronomists": len(agronomists),
            "merchants": len(merchants), "threads": len(pairs)}


DEMO_SECRET = "demo-secret-1"


def seed_demo(platform) -> dict:
    """Small login-ready scenario built through the real service operations."""
    reg = platform.registry
    alice, _ = reg.register("alice", ROLE_FARMER,
                            {"phone": "+55 51 90000-0001", "locality": "Montenegro"},
                            DEMO_SECRET)
    bruno, _ = reg.register("bruno", ROLE_AGRONOMIST,
                            {"phone": "+55 51 90000-0002", "locality": "Porto Alegre"},
                            DEMO_SECRET)
    carla, _ = reg.register("carla", ROLE_MERCHANT,
                            {"phone": "+55 51 90000-0003", "locality": "Caxias do Sul"},
                            DEMO_SECRET)
    farm = reg.create_farm(alice.id, "Sitio Laranjal", "Montenegro")
    crop = reg.create_crop(alice.id, farm.id, "orange", planted_at="2022-08-10")
    reg.create_crop(alice.id, farm.id, "tangerine", planted_at="2023-01-20")
    listing = platform.market.publish_listing(
        alice.id, product="orange crate", quantity=250, unit="kg",
        starting_price=50000, ends_at=platform.clock() + 7 * 86400,
        description="fresh harvest", crop_id=crop.id)
    thread = platform.chat.open_thread(alice.id, bruno.id)
    platform.chat.send_message(alice.id, thread.id, "My orange leaves have brown spots.")
    platform.chat.send_message(bruno.id, thread.id, "Send a photo through diagnosis, please.")
    return {"users": {"alice": alice.id, "bruno": bruno.id, "carla": carla.id},
            "farm": farm.id, "crop": crop.id, "listing": listing.id,
            "thread": thread.id, "secret": DEMO_SECRET}


def seed_downloads(store: DocumentStore, start_day: str = "2024-01-01",
                   days: int = 90, seed: int = 7) -> int:
    """Synthetic three-month daily download history with trend and weekly dip."""
    rng = np.random.default_rng(seed)
    start = datetime.date.fromisoformat(start_day)
    total = 0
    for i in range(days):
        day = (start + datetime.timedelta(days=i)).isoformat()
        level = 12 + 0.25 * i + 6 * np.sin(2 * np.pi * i / 7)
        count = max(0, int(round(level + rng.normal(0, 3))))
        for _ in range(count):
            record_download(store, day)
        total += count
    return total
