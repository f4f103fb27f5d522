"""Referential integrity sweep over the whole store.

Returns human-readable violation strings; an empty list means every
cross-reference (user, farm, crop, sample, request, report, thread, listing,
purchase, blob) resolves.
"""
from __future__ import annotations

from .store import BlobStore, DocumentStore


def _exists(store: DocumentStore, collection: str, doc_id) -> bool:
    if not doc_id:
        return False
    try:
        store.get(collection, doc_id)
        return True
    except Exception:
        return False


def check_integrity(store: DocumentStore, blobs: BlobStore = None) -> list:
    problems = []

    def user_ok(doc, field, value, optional=False):
        if value is None and optional:
            return
        if not _exists(store, "users", value):
            problems.append(f"{doc.collection}/{doc.id}: {field} -> missing user {value!r}")

    for doc in store.list("usernames"):
        user_ok(doc, "user_id", doc.payload.get("user_id"))
    for doc in store.list("sessions"):
        user_ok(doc, "user_id", doc.payload.get("user_id"))
    for doc in store.list("farms"):
        user_ok(doc, "farmer_id", doc.payload.get("farmer_id"))
    for doc in store.list("crops"):
        user_ok(doc, "farmer_id", doc.payload.get("farmer_id"))
        if not _exists(store, "farms", doc.payload.get("farm_id")):
            problems.append(f"crops/{doc.id}: farm_id -> missing farm")
    for doc in store.list("samples"):
        user_ok(doc, "farmer_id", doc.payload.get("farmer_id"))
        if not _exists(store, "crops", doc.payload.get("crop_id")):
            problems.append(f"samples/{doc.id}: crop_id -> missing crop")
        if blobs is not None and not blobs.has(doc.payload.get("image_ref", "")):
            problems.append(f"samples/{doc.id}: image_ref -> missing blob")
    for doc in store.list("requests"):
        p = doc.payload
        user_ok(doc, "farmer_id", p.get("farmer_id"))
        user_ok(doc, "agronomist_id", p.get("agronomist_id"), optional=True)
        if not _exists(store, "samples", p.get("sample_id")):
            problems.append(f"requests/{doc.id}: sample_id -> missing sample")
        if not _exists(store, "crops", p.get("crop_id")):
            problems.append(f"requests/{doc.id}: crop_id -> missing crop")
        attachments = p.get("attachments") or {}
        if blobs is not None:
            for key in ("tgi_heatmap", "grvi_heatmap"):
                ref = attachments.get(key)
                if ref and not blobs.has(ref):
                    problems.append(f"requests/{doc.id}: {key} -> missing blob")
    for doc in store.list("reports"):
        user_ok(doc, "agronomist_id", doc.payload.get("agronomist_id"))
        if not _exists(store, "requests", doc.payload.get("request_id")):
            problems.append(f"reports/{doc.id}: request_id -> missing request")
    for doc in store.list("threads"):
        for pid in doc.payload.get("participants", []):
            user_ok(doc, "participant", pid)
        for msg in doc.payload.get("messages", []):
            if msg.get("sender_id") not in doc.payload.get("participants", []):
                problems.append(f"threads/{doc.id}: message {msg.get('seq')} "
                                f"from non-participant")
    for doc in store.list("listings"):
        p = doc.payload
        user_ok(doc, "farmer_id", p.get("farmer_id"))
        if p.get("crop_id") and not _exists(store, "crops", p["crop_id"]):
            problems.append(f"listings/{doc.id}: crop_id -> missing crop")
        for offer in p.get("offers", []):
            user_ok(doc, "offer merchant_id", offer.get("merchant_id"))
        if blobs is not None:
            for ref in p.get("photo_refs", []):
                if not blobs.has(ref):
                    problems.append(f"listings/{doc.id}: photo_ref -> missing blob")
    for doc in store.list("purchases"):
        p = doc.payload
        user_ok(doc, "farmer_id", p.get("farmer_id"))
        user_ok(doc, "merchant_id", p.get("merchant_id"))
        if not _exists(store, "listings", p.get("listing_id")):
            problems.append(f"purchases/{doc.id}: listing_id -> missing listing")
    return problems
