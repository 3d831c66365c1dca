#!/usr/bin/env python3
"""Regenerates the bundled evidence and scenario files."""
import hashlib
import json
import pathlib

HERE = pathlib.Path(__file__).resolve().parent

SOURCES = {
    "E1": ("GEOSPATIAL", "gps-0"),
    "E2": ("SENSOR", "camera-front"),
    "private_ground_fix": ("GEOSPATIAL", "gps-0"),
    "testing_permit_active": ("DOCUMENT", "dmv-permit-registry"),
    "non_testing_trip": ("DOCUMENT", "dispatch-log"),
    "license_class_match": ("DOCUMENT", "dmv-license-check"),
    "license_class_mismatch": ("DOCUMENT", "dmv-license-check"),
    "operator_on_roster": ("DOCUMENT", "fleet-roster"),
    "operator_not_on_roster": ("DOCUMENT", "fleet-roster"),
    "seat_occupied": ("SENSOR", "seat-pressure"),
    "seat_empty": ("SENSOR", "seat-pressure"),
    "driver_attentive": ("SENSOR", "cabin-camera"),
    "driver_inattentive": ("SENSOR", "cabin-camera"),
    "hands_on_wheel": ("SENSOR", "steering-torque"),
    "manual_override_fault": ("SENSOR", "steering-torque"),
    "insurance_on_file": ("DOCUMENT", "insurer-api"),
    "insurance_lapsed": ("DOCUMENT", "insurer-api"),
}

CONFIRMING = [
    "E1", "testing_permit_active", "license_class_match", "operator_on_roster",
    "seat_occupied", "driver_attentive", "hands_on_wheel", "insurance_on_file",
]


def record(record_id, evidence_id, timestamp, note=""):
    kind, source_id = SOURCES[evidence_id]
    payload = f"{record_id}|{evidence_id}|{source_id}|{timestamp}"
    return {
        "record_id": record_id,
        "evidence_id": evidence_id,
        "source": {"kind": kind, "source_id": source_id},
        "payload_digest": hashlib.sha256(payload.encode()).hexdigest(),
        "timestamp": timestamp,
        "note": note,
    }


def confirming(hour=8):
    return [record(f"r{i + 1:02d}", eid, f"2024-05-01T{hour:02d}:00:{i * 5:02d}Z") for i, eid in enumerate(CONFIRMING)]


def write_jsonl(name, records):
    lines = [json.dumps(r, sort_keys=True, separators=(",", ":")) for r in records]
    (HERE / "evidence" / name).write_text("".join(line + "\n" for line in lines))


def main():
    (HERE / "evidence").mkdir(exist_ok=True)
    (HERE / "scenarios").mkdir(exist_ok=True)
    base = confirming()
    write_jsonl("all_established.jsonl", base)
    sign = record("r09", "E2", "2024-05-01T08:00:02Z", "speed-limit sign on a public street")
    write_jsonl("road_sign_session.jsonl", base[:1] + [sign] + base[1:])
    lapsed = [r for r in base if r["evidence_id"] != "insurance_on_file"]
    lapsed.append(record("r08", "insurance_lapsed", base[-1]["timestamp"]))
    write_jsonl("insurance_lapsed.jsonl", lapsed)
    write_jsonl("empty.jsonl", [])

    scenario = {
        "batches": [
            {"at": "2024-05-01T08:00:00Z", "add": base},
            {"at": "2024-05-01T09:00:00Z", "add": [record("r09", "E2", "2024-05-01T09:00:00Z")]},
            {"at": "2024-05-01T10:00:00Z", "retract": ["r08"],
             "add": [record("r10", "insurance_lapsed", "2024-05-01T10:00:00Z", "insurer reports policy lapse")]},
            {"at": "2024-05-01T11:00:00Z", "add": [record("r11", "driver_attentive", "2024-05-01T11:00:00Z")]},
        ]
    }
    (HERE / "scenarios" / "insurance_lapse.json").write_text(json.dumps(scenario, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
