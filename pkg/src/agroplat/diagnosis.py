"""Sample submission, automated analysis, agronomist claim/report workflow.

Request lifecycle: submitted -> processed -> assigned -> diagnosed. Every
transition is a CAS write on the request document, so concurrent claims or
double reports resolve to exactly one winner.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

from .errors import (AlreadyClaimed, AlreadyDiagnosed, Forbidden, MissingField,
                     NotFound, NotOwner, NotAssignee, PipelineError, SpecError,
                     StateConflict, VersionConflict)
from .events import Event, EventBus
from .images import decode_rgb
from .neuralnet import CLASS_LABELS, predict
from .neuralnet.dataset import LabeledDataset, image_to_input
from .registry import ROLE_AGRONOMIST, Registry
from .store import BlobStore, DocumentStore, new_id
from .vegindex import compute_index, render_heatmap, summarize_index, to_reflectance

STATE_SUBMITTED = "submitted"
STATE_PROCESSED = "processed"
STATE_ASSIGNED = "assigned"
STATE_DIAGNOSED = "diagnosed"
STATES = (STATE_SUBMITTED, STATE_PROCESSED, STATE_ASSIGNED, STATE_DIAGNOSED)


@dataclass(frozen=True)
class DiagnosisRequest:
    id: str
    sample_id: str
    farmer_id: str
    crop_id: str
    state: str
    attachments: dict
    agronomist_id: str
    created_at: float
    updated_at: float


@dataclass(frozen=True)
class DiagnosisReport:
    request_id: str
    agronomist_id: str
    diagnosis: str
    confirmed_label: str
    recommendations: str
    filed_at: float


class DiagnosisService:
    """model_provider is a zero-argument callable returning the current
    classifier, so retraining swaps the model without touching this service.
    on_submitted, when set, is called with each new request id (the runtime
    wires it to the processing pool).
    """

    def __init__(self, store: DocumentStore, blobs: BlobStore, registry: Registry,
                 bus: EventBus, model_provider, clock=time.time, on_submitted=None):
        self.store = store
        self.blobs = blobs
        self.registry = registry
        self.bus = bus
        self.model_provider = model_provider
        self.clock = clock
        self.on_submitted = on_submitted

    # -- views ---------------------------------------------------------------

    def _request(self, doc) -> DiagnosisRequest:
        p = doc.payload
        return DiagnosisRequest(
            id=doc.id, sample_id=p["sample_id"], farmer_id=p["farmer_id"],
            crop_id=p["crop_id"], state=p["state"],
            attachments=p.get("attachments"), agronomist_id=p.get("agronomist_id"),
            created_at=p["created_at"], updated_at=p["updated_at"])

    def get_request(self, request_id: str) -> DiagnosisRequest:
        return self._request(self.store.get("requests", request_id))

    def list_requests(self, state: str = None, farmer_id: str = None,
                      agronomist_id: str = None) -> list:
        if state is not None and state not in STATES:
            raise SpecError(f"unknown request state {state!r}")
        where = {}
        if state:
            where["state"] = state
        if farmer_id:
            where["farmer_id"] = farmer_id
        if agronomist_id:
            where["agronomist_id"] = agronomist_id
        docs = self.store.list("requests", where=where or None, order_by="created_at")
        return [self._request(d) for d in docs]

    # -- submission ------------------------------------------------------------

    def submit_sample(self, farmer_id: str, crop_id: str, image_bytes: bytes) -> DiagnosisRequest:
        crop = self.registry.get_crop(crop_id)
        if crop.farmer_id != farmer_id:
            raise NotOwner(f"crop {crop_id} belongs to another farmer")
        decode_rgb(image_bytes)  # reject undecodable photos before persisting anything
        image_ref = self.blobs.put(image_bytes)
        now = self.clock()
        sample_id = new_id()
        self.store.put("samples", sample_id, {
            "farmer_id": farmer_id, "crop_id": crop_id,
            "image_ref": image_ref, "submitted_at": now}, 0)
        request_id = new_id()
        payload = {
            "sample_id": sample_id, "farmer_id": farmer_id, "crop_id": crop_id,
            "state": STATE_SUBMITTED, "attachments": None, "agronomist_id": None,
            "created_at": now, "updated_at": now,
        }
        self.store.put("requests", request_id, payload, 0)
        request = DiagnosisRequest(request_id, sample_id, farmer_id, crop_id,
                                   STATE_SUBMITTED, None, None, now, now)
        if self.on_submitted is not None:
            self.on_submitted(request_id)
        return request

    # -- machine processing ------------------------------------------------------

    def process_request(self, request_id: str) -> DiagnosisRequest:
        doc = self.store.get("requests", request_id)
        if doc.payload["state"] != STATE_SUBMITTED:
            raise StateConflict(f"request {request_id} is {doc.payload['state']}, "
                                f"not {STATE_SUBMITTED}")
        sample = self.store.get("samples", doc.payload["sample_id"])
        try:
            image_bytes = self.blobs.get(sample.payload["image_ref"])
            img = decode_rgb(image_bytes)
            refl = to_reflectance(img)
            attachments = {}
            for kind in ("tgi", "grvi"):
                index_map = compute_index(refl, kind)
                summary = summarize_index(index_map)
                heat_ref = self.blobs.put(render_heatmap(index_map))
                attachments[kind] = summary.to_document()
                attachments[f"{kind}_heatmap"] = heat_ref
            model = self.model_provider()
            pred = predict(model, image_to_input(img, model.spec.input_shape))
            attachments["prediction"] = {
                "label": pred.label,
                "class_index": pred.class_index,
                "probabilities": list(pred.probabilities),
                "model_version": pred.model_version,
            }
        except Exception as exc:
            # leave the request submitted so the job can be retried
            raise PipelineError(f"analysis failed for request {request_id}: {exc}") from exc
        p = doc.payload
        p["state"] = STATE_PROCESSED
        p["attachments"] = attachments
        p["updated_at"] = self.clock()
        try:
            self.store.put("requests", request_id, p, doc.version)
        except VersionConflict:
            raise StateConflict(f"request {request_id} changed during processing") from None
        self.bus.emit(Event(type="diagnosis.processed", topic=f"request/{request_id}",
                            payload={"request_id": request_id, "state": STATE_PROCESSED},
                            recipients=(p["farmer_id"],)))
        return self.get_request(request_id)

    # -- agronomist workflow -------------------------------------------------------

    def claim_request(self, agronomist_id: str, request_id: str) -> DiagnosisRequest:
        user = self.registry.get_user(agronomist_id)
        if user.role != ROLE_AGRONOMIST:
            raise Forbidden("only agronomists claim requests")
        while True:
            doc = self.store.get("requests", request_id)
            p = doc.payload
            if p["state"] != STATE_PROCESSED:
                raise AlreadyClaimed(f"request {request_id} is {p['state']}, "
                                     f"not {STATE_PROCESSED}")
            p["state"] = STATE_ASSIGNED
            p["agronomist_id"] = agronomist_id
            p["updated_at"] = self.clock()
            try:
                self.store.put("requests", request_id, p, doc.version)
                break
            except VersionConflict:
                continue  # somebody else moved it; re-read and re-judge
        self.bus.emit(Event(type="diagnosis.assigned", topic=f"request/{request_id}",
                            payload={"request_id": request_id, "state": STATE_ASSIGNED,
                                     "agronomist_id": agronomist_id}))
        return self.get_request(request_id)

    def file_report(self, agronomist_id: str, request_id: str, diagnosis: str,
                    confirmed_label: str = None, recommendations: str = "") -> DiagnosisReport:
        if not diagnosis or not diagnosis.strip():
            raise MissingField("diagnosis text must be nonempty")
        if confirmed_label is not None and confirmed_label not in CLASS_LABELS:
            raise MissingField(f"confirmed label must be one of {CLASS_LABELS}")
        doc = self.store.get("requests", request_id)
        p = doc.payload
        if p["state"] == STATE_DIAGNOSED:
            raise AlreadyDiagnosed(request_id)
        if p["state"] != STATE_ASSIGNED or p["agronomist_id"] != agronomist_id:
            raise NotAssignee(f"request {request_id} is not assigned to {agronomist_id}")
        now = self.clock()
        report = {
            "request_id": request_id, "agronomist_id": agronomist_id,
            "diagnosis": diagnosis, "confirmed_label": confirmed_label,
            "recommendations": recommendations or "", "filed_at": now,
            "harvested": False,
        }
        try:
            # one report per request: the report id is the request id
            self.store.put("reports", request_id, report, 0)
        except VersionConflict:
            raise AlreadyDiagnosed(request_id) from None
        while True:
            doc = self.store.get("requests", request_id)
            p = doc.payload
            if p["state"] == STATE_DIAGNOSED:
                break
            p["state"] = STATE_DIAGNOSED
            p["updated_at"] = now
            try:
                self.store.put("requests", request_id, p, doc.version)
                break
            except VersionConflict:
                continue
        self.bus.emit(Event(type="diagnosis.report", topic=f"request/{request_id}",
                            payload={"request_id": request_id,
                                     "agronomist_id": agronomist_id,
                                     "diagnosis": diagnosis,
                                     "confirmed_label": confirmed_label,
                                     "recommendations": report["recommendations"],
                                     "filed_at": now},
                            recipients=(p["farmer_id"],)))
        return DiagnosisReport(request_id, agronomist_id, diagnosis,
                               confirmed_label, report["recommendations"], now)

    def get_report(self, request_id: str) -> DiagnosisReport:
        doc = self.store.get("reports", request_id)
        p = doc.payload
        return DiagnosisReport(p["request_id"], p["agronomist_id"], p["diagnosis"],
                               p["confirmed_label"], p["recommendations"], p["filed_at"])

    def history(self, user_id: str, role: str) -> list:
        """Filed reports: agronomists see their own filings, farmers the
        reports on their requests, newest first."""
        out = []
        for doc in self.store.list("reports"):
            p = doc.payload
            if role == ROLE_AGRONOMIST and p["agronomist_id"] != user_id:
                continue
            if role != ROLE_AGRONOMIST:
                req = self.store.get("requests", p["request_id"])
                if req.payload["farmer_id"] != user_id:
                    continue
            out.append(DiagnosisReport(p["request_id"], p["agronomist_id"],
                                       p["diagnosis"], p["confirmed_label"],
                                       p["recommendations"], p["filed_at"]))
        out.sort(key=lambda r: (-r.filed_at, r.request_id))
        return out

    # -- continual learning --------------------------------------------------------

    def harvest_training_labels(self) -> LabeledDataset:
        """Collect (photo, confirmed label) pairs from reports not yet
        harvested, marking them so the next harvest starts empty."""
        increment = LabeledDataset()
        for doc in self.store.list("reports", order_by="filed_at"):
            p = doc.payload
            if p["harvested"] or not p["confirmed_label"]:
                continue
            request = self.store.get("requests", p["request_id"])
            sample = self.store.get("samples", request.payload["sample_id"])
            img = decode_rgb(self.blobs.get(sample.payload["image_ref"]))
            while True:
                try:
                    fresh = self.store.get("reports", doc.id)
                    if fresh.payload["harvested"]:
                        break
                    fresh.payload["harvested"] = True
                    self.store.put("reports", doc.id, fresh.payload, fresh.version)
                    increment.add(img, p["confirmed_label"])
                    break
                except VersionConflict:
                    continue
        return increment
