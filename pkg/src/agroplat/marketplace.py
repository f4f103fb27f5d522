"""English-auction marketplace: listings, strictly increasing offers, timed close.

All money values are integer counts of the smallest currency unit. Offer
processing per listing is serialized by a lock, and offers are embedded in
the listing document so the accepted sequence is a single serial history.
"""
from __future__ import annotations

import threading
import time
from dataclasses import dataclass

from .errors import (AlreadyClosed, AuctionClosed, BidTooLow, Forbidden,
                     MissingField, NotFound, NotYetEnded, PastDeadline)
from .events import Event, EventBus
from .registry import ROLE_FARMER, ROLE_MERCHANT, Registry
from .store import DocumentStore, new_id

STATUS_OPEN = "open"
STATUS_SOLD = "closed_sold"
STATUS_UNSOLD = "closed_unsold"


@dataclass(frozen=True)
class Offer:
    listing_id: str
    seq: int
    merchant_id: str
    amount: int
    placed_at: float


@dataclass(frozen=True)
class Listing:
    id: str
    farmer_id: str
    product: str
    quantity: float
    unit: str
    description: str
    photo_refs: tuple
    crop_id: str
    starting_price: int
    ends_at: float
    created_at: float
    status: str
    offers: tuple


@dataclass(frozen=True)
class Purchase:
    listing_id: str
    farmer_id: str
    merchant_id: str
    product: str
    final_price: int
    farmer_contact: dict
    merchant_contact: dict
    closed_at: float


def _money(value, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value <= 0:
        raise MissingField(f"{what} must be a positive integer amount in the "
                           f"smallest currency unit")
    return value


class MarketService:
    def __init__(self, store: DocumentStore, registry: Registry, bus: EventBus,
                 clock=time.time):
        self.store = store
        self.registry = registry
        self.bus = bus
        self.clock = clock
        self._locks = {}
        self._locks_guard = threading.Lock()

    def _listing_lock(self, listing_id: str) -> threading.Lock:
        with self._locks_guard:
            lock = self._locks.get(listing_id)
            if lock is None:
                lock = self._locks[listing_id] = threading.Lock()
            return lock

    # -- publication -------------------------------------------------------

    def publish_listing(self, farmer_id: str, product: str, quantity, unit: str,
                        starting_price, ends_at: float, description: str = "",
                        photo_refs=(), crop_id: str = "") -> Listing:
        user = self.registry.get_user(farmer_id)
        if user.role != ROLE_FARMER:
            raise Forbidden("only farmers publish listings")
        if not product:
            raise MissingField("product name must be nonempty")
        if not isinstance(quantity, (int, float)) or isinstance(quantity, bool) \
                or quantity <= 0:
            raise MissingField("quantity must be positive")
        if not unit:
            raise MissingField("quantity unit must be nonempty")
        starting_price = _money(starting_price, "starting price")
        now = self.clock()
        if not isinstance(ends_at, (int, float)) or ends_at <= now:
            raise PastDeadline(f"auction end {ends_at} is not in the future")
        if crop_id:
            self.registry.get_crop(crop_id)
        listing_id = new_id()
        payload = {
            "farmer_id": farmer_id,
            "product": product,
            "quantity": quantity,
            "unit": unit,
            "description": description or "",
            "photo_refs": list(photo_refs),
            "crop_id": crop_id or "",
            "starting_price": starting_price,
            "ends_at": float(ends_at),
            "created_at": now,
            "status": STATUS_OPEN,
            "offers": [],
        }
        self.store.put("listings", listing_id, payload, 0)
        return self._listing(listing_id, payload)

    def _listing(self, listing_id: str, p: dict) -> Listing:
        offers = tuple(Offer(listing_id, o["seq"], o["merchant_id"], o["amount"],
                             o["placed_at"]) for o in p["offers"])
        return Listing(listing_id, p["farmer_id"], p["product"], p["quantity"],
                       p["unit"], p["description"], tuple(p["photo_refs"]),
                       p["crop_id"], p["starting_price"], p["ends_at"],
                       p["created_at"], p["status"], offers)

    # -- bidding -----------------------------------------------------------

    def place_offer(self, merchant_id: str, listing_id: str, amount) -> Offer:
        user = self.registry.get_user(merchant_id)
        if user.role != ROLE_MERCHANT:
            raise Forbidden("only merchants place offers")
        amount = _money(amount, "offer amount")
        with self._listing_lock(listing_id):
            doc = self.store.get("listings", listing_id)
            p = doc.payload
            if p["status"] == STATUS_OPEN and self.clock() >= p["ends_at"]:
                self._close_locked(doc)  # deadline passed: close, then reject
                raise AuctionClosed(listing_id)
            if p["status"] != STATUS_OPEN:
                raise AuctionClosed(listing_id)
            offers = p["offers"]
            if offers:
                best = offers[-1]["amount"]
                if amount <= best:
                    raise BidTooLow(best)
            else:
                if amount < p["starting_price"]:
                    raise BidTooLow(None)
            displaced = offers[-1]["merchant_id"] if offers else None
            entry = {"seq": len(offers) + 1, "merchant_id": merchant_id,
                     "amount": amount, "placed_at": self.clock()}
            offers.append(entry)
            self.store.put("listings", listing_id, p, doc.version)
            self.bus.emit(Event(
                type="auction.offer",
                topic=f"listing/{listing_id}",
                payload={"listing_id": listing_id, **entry},
            ))
            if displaced is not None and displaced != merchant_id:
                self.bus.emit(Event(
                    type="auction.outbid",
                    topic=f"listing/{listing_id}",
                    payload={"listing_id": listing_id, "amount": amount,
                             "product": p["product"]},
                    recipients=(displaced,),
                ))
        return Offer(listing_id, entry["seq"], merchant_id, amount, entry["placed_at"])

    # -- closing -----------------------------------------------------------

    def close_auction(self, listing_id: str):
        """Close at/after the deadline. Returns the Purchase, or None if unsold."""
        with self._listing_lock(listing_id):
            doc = self.store.get("listings", listing_id)
            p = doc.payload
            if p["status"] != STATUS_OPEN:
                raise AlreadyClosed(listing_id)
            if self.clock() < p["ends_at"]:
                raise NotYetEnded(listing_id)
            return self._close_locked(doc)

    def _close_locked(self, doc):
        p = doc.payload
        now = self.clock()
        topic = f"listing/{doc.id}"
        if not p["offers"]:
            p["status"] = STATUS_UNSOLD
            self.store.put("listings", doc.id, p, doc.version)
            self.bus.emit(Event(type="auction.unsold", topic=topic,
                                payload={"listing_id": doc.id, "product": p["product"]},
                                recipients=(p["farmer_id"],)))
            return None
        winning = p["offers"][-1]
        farmer = self.registry.get_user(p["farmer_id"])
        merchant = self.registry.get_user(winning["merchant_id"])
        p["status"] = STATUS_SOLD
        self.store.put("listings", doc.id, p, doc.version)
        purchase = {
            "listing_id": doc.id,
            "farmer_id": farmer.id,
            "merchant_id": merchant.id,
            "product": p["product"],
            "final_price": winning["amount"],
            "farmer_contact": dict(farmer.contact),
            "merchant_contact": dict(merchant.contact),
            "closed_at": now,
        }
        self.store.put("purchases", doc.id, purchase, 0)
        self.bus.emit(Event(type="auction.won", topic=topic,
                            payload={"listing_id": doc.id, "product": p["product"],
                                     "final_price": winning["amount"],
                                     "farmer_contact": dict(farmer.contact)},
                            recipients=(merchant.id,)))
        self.bus.emit(Event(type="auction.sold", topic=topic,
                            payload={"listing_id": doc.id, "product": p["product"],
                                     "final_price": winning["amount"],
                                     "merchant_contact": dict(merchant.contact)},
                            recipients=(farmer.id,)))
        return Purchase(**purchase)

    def close_due(self) -> int:
        """Close every open listing whose deadline has passed (scheduler sweep)."""
        closed = 0
        now = self.clock()
        for doc in self.store.list("listings", where={"status": STATUS_OPEN}):
            if doc.payload["ends_at"] <= now:
                try:
                    self.close_auction(doc.id)
                    closed += 1
                except (AlreadyClosed, NotYetEnded):
                    pass  # raced with a lazy close, fine
        return closed

    # -- reads -------------------------------------------------------------

    def get_listing(self, listing_id: str) -> Listing:
        with self._listing_lock(listing_id):
            doc = self.store.get("listings", listing_id)
            if doc.payload["status"] == STATUS_OPEN and self.clock() >= doc.payload["ends_at"]:
                self._close_locked(doc)
                doc = self.store.get("listings", listing_id)
            return self._listing(doc.id, doc.payload)

    def list_onsale(self, after=None, limit: int = None) -> list:
        """Open listings ordered by (end time, id); pagination key is that pair."""
        self.close_due()
        docs = self.store.list("listings", where={"status": STATUS_OPEN},
                               order_by="ends_at", after=after, limit=limit)
        return [self._listing(d.id, d.payload) for d in docs]

    def list_mine(self, farmer_id: str) -> list:
        docs = self.store.list("listings", where={"farmer_id": farmer_id},
                               order_by="created_at")
        return [self._listing(d.id, d.payload) for d in docs]

    def purchase_history(self, user_id: str) -> list:
        """Merchants see their wins, farmers their completed sales."""
        out = []
        for doc in self.store.list("purchases"):
            p = doc.payload
            if user_id in (p["merchant_id"], p["farmer_id"]):
                out.append(Purchase(**p))
        out.sort(key=lambda r: (-r.closed_at, r.listing_id))
        return out
