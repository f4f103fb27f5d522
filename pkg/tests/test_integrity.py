import time

from agroplat.integrity import check_integrity
from agroplat.seeds import seed_demo, seed_usage

from conftest import make_platform, register_trio, solid_png


def test_clean_platform_has_no_violations(tmp_path):
    platform = make_platform(tmp_path)
    register_trio(platform)
    assert check_integrity(platform.store, platform.blobs) == []
    platform.stop()


def test_full_workflow_leaves_references_intact(tmp_path):
    platform = make_platform(tmp_path, clock=time.time)
    farmer, agro, merchant = register_trio(platform)
    farm = platform.registry.create_farm(farmer.id, "North", "valley")
    crop = platform.registry.create_crop(farmer.id, farm.id, "lemon")
    request = platform.diagnosis.submit_sample(
        farmer.id, crop.id, solid_png((30, 200, 30)))
    assert platform.drain_processing()
    platform.diagnosis.claim_request(agro.id, request.id)
    platform.diagnosis.file_report(agro.id, request.id, "looks healthy",
                                   confirmed_label="healthy")
    listing = platform.market.publish_listing(
        farmer.id, product="lemon", quantity=5, unit="crate",
        starting_price=100, ends_at=platform.clock() + 60)
    platform.market.place_offer(merchant.id, listing.id, 120)
    thread = platform.chat.open_thread(farmer.id, agro.id)
    platform.chat.send_message(farmer.id, thread.id, "hello")
    assert check_integrity(platform.store, platform.blobs) == []
    platform.stop()


def test_seeded_fixtures_are_internally_consistent(tmp_path):
    platform = make_platform(tmp_path)
    seed_usage(platform.store, platform.blobs, platform.clock)
    seed_demo(platform)
    assert check_integrity(platform.store, platform.blobs) == []
    platform.stop()


def test_dangling_references_are_reported(tmp_path):
    platform = make_platform(tmp_path)
    farmer, agro, merchant = register_trio(platform)
    farm = platform.registry.create_farm(farmer.id, "North", "valley")
    crop = platform.registry.create_crop(farmer.id, farm.id, "lemon")
    store = platform.store

    farm_doc = store.get("farms", farm.id)
    broken = dict(farm_doc.payload, farmer_id="feedfacefeedface")
    store.put("farms", farm.id, broken, farm_doc.version)
    problems = check_integrity(store, platform.blobs)
    assert any(f"farms/{farm.id}" in p and "missing user" in p
               for p in problems)

    crop_doc = store.get("crops", crop.id)
    broken = dict(crop_doc.payload, farm_id="feedfacefeedface")
    store.put("crops", crop.id, broken, crop_doc.version)
    problems = check_integrity(store, platform.blobs)
    assert any(f"crops/{crop.id}" in p and "missing farm" in p
               for p in problems)
    platform.stop()


def test_missing_blob_and_foreign_message_sender_reported(tmp_path):
    platform = make_platform(tmp_path, clock=time.time)
    farmer, agro, merchant = register_trio(platform)
    farm = platform.registry.create_farm(farmer.id, "North", "valley")
    crop = platform.registry.create_crop(farmer.id, farm.id, "lemon")
    request = platform.diagnosis.submit_sample(
        farmer.id, crop.id, solid_png((30, 200, 30)))
    store = platform.store

    sample_doc = store.get("samples", request.sample_id)
    broken = dict(sample_doc.payload, image_ref="0" * 64)
    store.put("samples", request.sample_id, broken, sample_doc.version)
    problems = check_integrity(store, platform.blobs)
    assert any("image_ref -> missing blob" in p for p in problems)
    # without a blob store the reference is not checkable
    assert not any("missing blob" in p for p in check_integrity(store))

    thread = platform.chat.open_thread(farmer.id, agro.id)
    platform.chat.send_message(farmer.id, thread.id, "hi")
    doc = store.get("threads", thread.id)
    doc.payload["messages"][0]["sender_id"] = merchant.id
    store.put("threads", thread.id, doc.payload, doc.version)
    problems = check_integrity(store, platform.blobs)
    assert any("from non-participant" in p for p in problems)
    platform.stop()
