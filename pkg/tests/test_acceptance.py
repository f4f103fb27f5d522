"""Acceptance gate: one test per shipping criterion.

Run with -v so each criterion reports its own pass/fail line; every test
also prints a PASS line with the measured runtime (visible with -s).
Known divergences in the reference figures are recorded as warnings,
never as weakened assertions.
"""
import io
import math
import random
import threading
import time
import warnings

import numpy as np
import pytest
from PIL import Image

from agroplat.analytics import loess_fit
from agroplat.client import ApiClient, RtClient
from agroplat.errors import BidTooLow, VersionConflict
from agroplat.gateway import GatewayServer
from agroplat.images import RgbImage
from agroplat.neuralnet import (CLASS_LABELS, TrainConfig, build_network,
                                count_parameters, disease_classifier_spec,
                                evaluate, fingerprint, loss_and_grads,
                                output_shapes, predict, report_from_matrix,
                                train)
from agroplat.seeds import seed_usage
from agroplat.store import DocumentStore
from agroplat.vegindex import (INDEX_KINDS, IndexMap, ReflectanceImage,
                               compute_index, render_heatmap, to_reflectance)

from conftest import (color_patch_dataset, make_platform, register_trio,
                      solid_png)
from test_analytics import day_series, loess_probe_oracle
from test_gradcheck import EPS, REL_TOL, forward_loss, reduced_spec
from test_marketplace import check_against_oracle, make_merchants, publish
from test_training import metric_oracle

CONTACT = {"phone": "+1", "locality": "valley"}


def stamp(name, started):
    elapsed = time.perf_counter() - started
    print(f"PASS {name} ({elapsed:.2f}s)")
    return elapsed


def note(text):
    warnings.warn(text)


# 1 ------------------------------------------------------------------------

def test_vegetation_index_values_and_heatmap_colors():
    started = time.perf_counter()

    uniform = to_reflectance(RgbImage(np.full((3, 3, 3), 77, dtype=np.uint8)))
    for kind in INDEX_KINDS:
        assert np.abs(compute_index(uniform, kind).values).max() <= 1e-9

    def one_pixel(r, g, b, kind):
        refl = ReflectanceImage(np.array([[[r, g, b]]], dtype=np.float64))
        return float(compute_index(refl, kind).values[0, 0])

    assert one_pixel(0.0, 1.0, 0.0, "tgi") == pytest.approx(95.0, abs=1e-9)
    assert one_pixel(0.0, 1.0, 0.0, "grvi") == pytest.approx(1.0, abs=1e-9)
    assert one_pixel(0.4, 0.5, 0.2, "tgi") == pytest.approx(21.5, abs=1e-9)
    assert one_pixel(0.2, 0.6, 0.7, "grvi") == pytest.approx(0.5, abs=1e-9)

    values = np.array([[0.0, 1.0], [0.5, 99.0]])
    valid = np.array([[True, True], [True, False]])
    png = render_heatmap(IndexMap("tgi", values, valid))
    pixels = Image.open(io.BytesIO(png)).convert("RGB")
    assert pixels.getpixel((0, 0)) == (255, 0, 0)        # minimum: red
    assert pixels.getpixel((1, 0)) == (0, 0, 255)        # maximum: blue
    assert pixels.getpixel((0, 1)) == (255, 255, 255)    # midpoint: white
    assert pixels.getpixel((1, 1)) == (128, 128, 128)    # masked: gray

    assert stamp("vegetation index formulas exact, heatmap endpoints bit-exact",
                 started) < 1.0


# 2 ------------------------------------------------------------------------

def test_classifier_shape_walk_and_parameter_total():
    started = time.perf_counter()
    spec = disease_classifier_spec(224)
    assert output_shapes(spec) == [
        (224, 224, 16), (112, 112, 16),
        (112, 112, 32), (56, 56, 32),
        (56, 56, 64), (28, 28, 64),
        (28, 28, 64), (50176,), (128,), (6,),
    ]
    per_layer = [
        (3 * 3 * 3 + 1) * 16,        # 448
        (3 * 3 * 16 + 1) * 32,       # 4,640
        (3 * 3 * 32 + 1) * 64,       # 18,496
        (28 * 28 * 64 + 1) * 128,    # 6,422,656
        (128 + 1) * 6,               # 774
    ]
    assert per_layer == [448, 4640, 18496, 6422656, 774]
    assert count_parameters(spec) == sum(per_layer) == 6447014
    note("expected divergence: the layer dimensions force a parameter total "
         "of 6,447,014; the figure of 3,989,413 sometimes quoted for this "
         "architecture is not reproducible from any layer-wise sum")
    stamp("classifier shape walk (10 checkpoints) and closed-form parameter "
          "total", started)


# 3 ------------------------------------------------------------------------

def test_backprop_matches_central_differences_on_reduced_network():
    started = time.perf_counter()
    model = build_network(reduced_spec(), seed=42)
    rng = np.random.default_rng(42)
    x = rng.random((16, 16, 3))
    class_index = 2

    model.zero_grads()
    loss_and_grads(model, x, class_index)
    analytic = [g.copy() for g in model.gradient_arrays()]
    params = model.parameter_arrays()

    flat = [(ai, i) for ai, a in enumerate(params) for i in
            rng.choice(a.size, size=min(a.size, 25), replace=False)]
    picks = [flat[i] for i in rng.choice(len(flat), size=100, replace=False)]
    for ai, i in picks:
        arr = params[ai]
        idx = np.unravel_index(int(i), arr.shape)
        orig = arr[idx]
        arr[idx] = orig + EPS
        hi = forward_loss(model, x, class_index)
        arr[idx] = orig - EPS
        lo = forward_loss(model, x, class_index)
        arr[idx] = orig
        numeric = (hi - lo) / (2 * EPS)
        got = analytic[ai][idx]
        rel = abs(got - numeric) / max(abs(got), abs(numeric), 1e-8)
        assert rel < REL_TOL, (ai, idx, got, numeric)

    assert stamp("analytic gradients vs central differences on 100 sampled "
                 "parameters (rel 1e-3)", started) < 60.0


# 4 ------------------------------------------------------------------------

def test_training_memorization_metric_consistency_and_counting_oracle():
    started = time.perf_counter()

    # (a) the 12-image color-patch set is fully separable well inside a
    # 200-epoch budget, deterministically per seed
    dataset = color_patch_dataset()
    config = TrainConfig(epochs=60, batch_size=4, seed=0, augment=False)
    assert config.epochs <= 200
    model = build_network(disease_classifier_spec(16), seed=0)
    train(model, dataset, config)
    report = evaluate(model, dataset)
    assert report.accuracy == 1.0
    for label in CLASS_LABELS:
        assert report.precision[label] == 1.0
        assert report.recall[label] == 1.0
        assert report.f1[label] == 1.0
    twin = build_network(disease_classifier_spec(16), seed=0)
    train(twin, dataset, config)
    assert fingerprint(twin) == fingerprint(model)

    # (b) recorded per-class field metrics: F1 is the harmonic mean of the
    # printed precision/recall within +/-0.01
    recorded = {
        "alternaria": (0.94, 0.94, 0.94),
        "acarus": (0.97, 0.97, 0.97),
        "canker": (0.84, 0.91, 0.88),
        "magnesium_deficiency": (0.98, 0.95, 0.96),
        "zinc_deficiency": (0.92, 0.88, 0.90),
    }
    for label, (p, r, f1) in recorded.items():
        assert f1 == pytest.approx(2 * p * r / (p + r), abs=0.01), label

    # (c) the metric engine against a brute-force counting oracle on 50
    # random confusion setups, and the report matrix against per-item counts
    rng = np.random.default_rng(7)
    for _ in range(50):
        matrix = rng.integers(0, 9, size=(6, 6)).tolist()
        matrix[0][0] += 1  # keep the table non-empty
        got = report_from_matrix(matrix)
        want, accuracy = metric_oracle(matrix)
        assert got.accuracy == pytest.approx(accuracy, abs=1e-12)
        for label, (p, r, f1, support) in want.items():
            assert got.precision[label] == pytest.approx(p, abs=1e-12)
            assert got.recall[label] == pytest.approx(r, abs=1e-12)
            assert got.f1[label] == pytest.approx(f1, abs=1e-12)
            assert got.support[label] == support
    matrix = [[0] * 6 for _ in range(6)]
    for img, label in dataset.items:
        pred = predict(model, img.pixels.astype(np.float64) / 255.0)
        matrix[CLASS_LABELS.index(label)][pred.class_index] += 1
    assert [list(row) for row in report.matrix] == matrix

    stamp("memorization within 200 epochs, recorded metrics harmonically "
          "consistent (+/-0.01), engine matches counting oracle x50", started)


# 5 ------------------------------------------------------------------------

def test_auction_streams_match_fold_oracle_and_concurrent_bidding(tmp_path):
    started = time.perf_counter()
    platform = make_platform(tmp_path)
    try:
        farmer, _, _ = register_trio(platform)
        merchants = make_merchants(platform, 4)
        rng = random.Random(77)
        for _ in range(1000):
            starting_price = rng.randint(1, 60)
            stream = [(rng.randrange(4), rng.randint(1, 90))
                      for _ in range(rng.randint(0, 20))]
            check_against_oracle(platform, platform.market, farmer,
                                 merchants, starting_price, stream)

        listing = publish(platform, farmer, price=10, lifetime=900)
        barrier = threading.Barrier(8)

        def bidder(k):
            barrier.wait()
            for j in range(12):
                try:
                    platform.market.place_offer(merchants[k % 4].id,
                                                listing.id, 10 + j * 8 + k)
                except BidTooLow:
                    pass

        threads = [threading.Thread(target=bidder, args=(k,))
                   for k in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()

        stored = platform.market.get_listing(listing.id)
        seqs = [o.seq for o in stored.offers]
        amounts = [o.amount for o in stored.offers]
        assert seqs == list(range(1, len(seqs) + 1))  # gapless
        assert amounts == sorted(set(amounts))        # strictly increasing
        assert amounts[-1] == 10 + 11 * 8 + 7         # global best always lands
        platform.clock.advance(2000)
        purchase = platform.market.close_auction(listing.id)
        assert purchase.final_price == amounts[-1]
        assert purchase.merchant_id == stored.offers[-1].merchant_id
        history = platform.market.purchase_history(purchase.merchant_id)
        assert [h.listing_id for h in history].count(listing.id) == 1
    finally:
        platform.stop()

    assert stamp("1000 bid streams equal the fold oracle; concurrent bids "
                 "gapless with one winner", started) < 30.0


# 6 ------------------------------------------------------------------------

def test_diagnosis_workflow_end_to_end_over_loopback_http(tmp_path):
    started = time.perf_counter()
    platform = make_platform(tmp_path, clock=time.time)
    server = GatewayServer(platform)
    server.start()
    try:
        farmer = ApiClient(server.base_url)
        farmer.register("fay", "farmer", CONTACT, "longsecret")
        agros = []
        for name in ("ann", "amy"):
            api = ApiClient(server.base_url)
            api.register(name, "agronomist", CONTACT, "longsecret")
            agros.append(api)

        rt = RtClient(*server.address, farmer.token)
        assert rt.recv()["type"] == "rt.welcome"

        farm = farmer.create_farm("North")
        crop = farmer.create_crop(farm["id"], "lemon")
        request = farmer.submit_sample(crop["id"], solid_png((30, 200, 30)))
        deadline = time.time() + 8
        view = farmer.get_request(request["id"])
        while view["state"] != "processed" and time.time() < deadline:
            time.sleep(0.05)
            view = farmer.get_request(request["id"])

        attachments = view["attachments"]
        assert set(attachments) == {"tgi", "grvi", "tgi_heatmap",
                                    "grvi_heatmap", "prediction"}
        assert attachments["tgi"]["kind"] == "tgi"
        assert attachments["grvi"]["kind"] == "grvi"
        for key in ("tgi_heatmap", "grvi_heatmap"):
            blob = farmer.blob(attachments[key])
            assert blob[:8] == b"\x89PNG\r\n\x1a\n"
        prediction = attachments["prediction"]
        assert prediction["label"] in CLASS_LABELS
        assert len(prediction["probabilities"]) == len(CLASS_LABELS)

        barrier = threading.Barrier(2)
        outcomes = []

        def claim(api):
            barrier.wait()
            status, _ = api.request(
                "POST", f"/diagnosis/requests/{request['id']}/claim")
            outcomes.append((status, api))

        racers = [threading.Thread(target=claim, args=(a,)) for a in agros]
        for t in racers:
            t.start()
        for t in racers:
            t.join()
        assert sorted(s for s, _ in outcomes) == [200, 409]
        winner = next(api for status, api in outcomes if status == 200)

        winner.file_report(request["id"], "leaf color looks healthy",
                           confirmed_label="healthy")

        reports = 0
        frame = rt.recv(timeout=5)
        while frame["type"] != "diagnosis.report":
            frame = rt.recv(timeout=5)
        reports += 1
        assert frame["payload"]["confirmed_label"] == "healthy"
        try:
            while True:
                if rt.recv(timeout=0.7)["type"] == "diagnosis.report":
                    reports += 1
        except (TimeoutError, OSError):
            pass
        assert reports == 1
        rt.close()

        harvested = platform.diagnosis.harvest_training_labels()
        assert len(harvested) == 1
        assert harvested.items[0][1] == "healthy"
    finally:
        server.stop()

    assert stamp("diagnosis end-to-end over HTTP: attachments, one claim "
                 "winner, one report frame, one harvested pair",
                 started) < 10.0


# 7 ------------------------------------------------------------------------

def test_chat_two_senders_frame_order_and_pagination(tmp_path):
    started = time.perf_counter()
    platform = make_platform(tmp_path, clock=time.time)
    server = GatewayServer(platform)
    server.start()
    try:
        farmer = ApiClient(server.base_url)
        out = farmer.register("fay", "farmer", CONTACT, "longsecret")
        agro = ApiClient(server.base_url)
        agro.register("ann", "agronomist", CONTACT, "longsecret")
        thread = agro.open_thread(out["user"]["id"])
        topic = f"thread/{thread['id']}"

        rt = RtClient(*server.address, agro.token)
        rt.recv()
        rt.subscribe(topic)
        assert rt.recv()["type"] == "rt.subscribed"

        def pump(api, tag):
            for i in range(100):
                api.send_message(thread["id"], f"{tag}-{i}")

        senders = [threading.Thread(target=pump, args=(farmer, "f")),
                   threading.Thread(target=pump, args=(agro, "a"))]
        for t in senders:
            t.start()
        for t in senders:
            t.join()

        frames = [rt.recv(timeout=15) for _ in range(200)]
        rt.close()
        assert all(f["type"] == "chat.message" for f in frames)
        assert [f["seq"] for f in frames] == list(range(3, 203))
        assert [f["payload"]["seq"] for f in frames] == list(range(1, 201))
        for tag in ("f", "a"):
            bodies = [f["payload"]["body"] for f in frames
                      if f["payload"]["body"].startswith(tag)]
            assert bodies == [f"{tag}-{i}" for i in range(100)]

        pages, after = [], 0
        while True:
            page = agro.fetch_messages(thread["id"], after=after, limit=33)
            if not page:
                break
            pages.append(page)
            after = page[-1]["seq"]
        assert [len(p) for p in pages] == [33] * 6 + [2]
        flat = [m["seq"] for page in pages for m in page]
        assert flat == list(range(1, 201))
    finally:
        server.stop()

    stamp("2x100 interleaved sends: receiver frame order equals sequence "
          "order, pagination partitions exactly", started)


# 8 ------------------------------------------------------------------------

def test_usage_snapshot_reproduces_every_recorded_cell(tmp_path):
    started = time.perf_counter()
    platform = make_platform(tmp_path)
    try:
        seed_usage(platform.store, platform.blobs, platform.clock)
        stats = platform.usage_stats()
        assert stats.farmers == 146
        assert stats.agronomists == 9
        assert stats.merchants == 12
        assert stats.users_total == 146 + 9 + 12 == 167
        assert stats.chats == 171
        assert stats.samples == 38
        assert stats.products == 65
        assert stats.messages == 1350
        assert stats.farms == 80
        assert stats.crops == 275
    finally:
        platform.stop()
    note("expected divergence: the recorded usage snapshot advertises a "
         "grand total of 171 users while its own role breakdown sums to "
         "146+9+12 = 167; the stats report derives the total from the roles")
    stamp("usage snapshot reproduces every recorded cell exactly", started)


# 9 ------------------------------------------------------------------------

def test_trend_smoother_polynomials_shift_and_probe_oracle():
    started = time.perf_counter()

    t = np.arange(40, dtype=float)
    constant = np.full(40, 5.25)
    line = 3.0 - 0.5 * t
    quadratic = 1.0 + 0.3 * t - 0.02 * t * t
    # every polynomial up to the fit degree is reproduced exactly
    cases = [(1, constant), (1, line),
             (2, constant), (2, line), (2, quadratic)]
    for degree, poly in cases:
        for span in (0.3, 0.6, 1.0):
            fit = loess_fit(day_series(poly.tolist()), span=span, degree=degree)
            assert np.allclose(fit.fitted, poly, atol=1e-9)

    rng = np.random.default_rng(5)
    y = (rng.random(50) * 20).tolist()
    base = loess_fit(day_series(y), span=0.5, degree=1)
    moved = loess_fit(day_series([v + 1000.0 for v in y]), span=0.5, degree=1)
    assert np.allclose(np.asarray(moved.fitted) - np.asarray(base.fitted),
                       1000.0, atol=1e-9)
    assert np.allclose(np.asarray(moved.lower) - np.asarray(base.lower),
                       1000.0, atol=1e-9)
    assert np.allclose(np.asarray(moved.upper) - np.asarray(base.upper),
                       1000.0, atol=1e-9)

    rng = np.random.default_rng(42)
    tt = np.arange(90, dtype=float)
    noisy = 12 + 0.25 * tt + 6 * np.sin(2 * np.pi * tt / 7) \
        + rng.standard_normal(90)
    series = day_series(noisy.tolist())
    probes = 0
    for span, degree in ((0.3, 1), (0.75, 2)):
        fit = loess_fit(series, span=span, degree=degree)
        for i in (0, 17, 44, 71, 89):
            want = loess_probe_oracle(series, span, degree, i)
            assert fit.fitted[i] == pytest.approx(want, abs=1e-6)
            probes += 1
    assert probes >= 5

    stamp("trend smoother: polynomial reproduction 1e-9, shift equivariance "
          "1e-9, probe oracle 1e-6", started)


# 10 -----------------------------------------------------------------------

def test_store_contention_gapless_and_restart_recovery(tmp_path):
    started = time.perf_counter()
    root = str(tmp_path / "docs")
    store = DocumentStore(root)
    store.put("counters", "shared", {"n": 0}, 0)

    workers, rounds = 100, 10
    claimed = [[] for _ in range(workers)]

    def contend(slot):
        for _ in range(rounds):
            while True:
                doc = store.get("counters", "shared")
                try:
                    version = store.put("counters", "shared",
                                        {"n": doc.payload["n"] + 1},
                                        doc.version)
                except VersionConflict:
                    continue
                claimed[slot].append(version)
                break

    threads = [threading.Thread(target=contend, args=(i,))
               for i in range(workers)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()

    versions = sorted(v for bucket in claimed for v in bucket)
    # gapless history and exactly one winner per round: every version from
    # 2 to workers*rounds+1 claimed exactly once across all threads
    assert versions == list(range(2, workers * rounds + 2))
    final = store.get("counters", "shared")
    assert final.payload["n"] == workers * rounds

    for i in range(30):
        store.put("records", f"doc{i:02d}", {"i": i, "pad": "x" * i}, 0)
    for i in range(0, 30, 3):
        store.put("records", f"doc{i:02d}", {"i": i, "updated": True}, 1)
    store.compact("records")
    store.put("records", "late", {"i": 99}, 0)
    expected = {doc.id: (doc.version, doc.payload)
                for doc in store.list("records")}
    expected["shared"] = (final.version, final.payload)

    recovered = DocumentStore(root)
    for doc_id, (version, payload) in expected.items():
        collection = "counters" if doc_id == "shared" else "records"
        doc = recovered.get(collection, doc_id)
        assert doc.version == version
        assert doc.payload == payload

    stamp("store: 100-way CAS contention gapless, restart loses nothing",
          started)
