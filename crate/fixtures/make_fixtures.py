#!/usr/bin/env python3
"""Regenerate the fixture corpus, replay file and golden reports.

Replay outputs are canonical renderings (via `ecostruct convert`) with a
fixed set of realistic defects: fences, truncation, wrong values and TOON
length/indentation errors. Token counts use a crude word/punctuation split;
emissions follow a per-format intensity with seeded noise.

Usage: python3 fixtures/make_fixtures.py [path/to/ecostruct]
"""

import json
import random
import re
import shutil
import subprocess
import sys
import tempfile
from datetime import datetime, timedelta, timezone
from pathlib import Path

HERE = Path(__file__).resolve().parent
BIN = Path(sys.argv[1]) if len(sys.argv) > 1 else HERE.parent / "target" / "debug" / "ecostruct"
MODEL = "replay-7b"
FORMATS = ["json", "xml", "yaml", "toon"]

# kgCO2e per 1000 generated tokens, before noise
INTENSITY = {"json": 1.42e-4, "xml": 1.61e-4, "yaml": 1.18e-4, "toon": 3.6e-5}
SECONDS_PER_TOKEN = {"json": 0.021, "xml": 0.022, "yaml": 0.020, "toon": 0.024}

CORPUS = [
    ("users-table", "List the three team members with numeric id, name and role.",
     {"users": [{"id": 1, "name": "Alice", "role": "admin"},
                {"id": 2, "name": "Bob", "role": "editor"},
                {"id": 3, "name": "Chen", "role": "viewer"}]}),
    ("product-catalog", "Produce a catalog of four products with sku, name, price in EUR and stock flag.",
     {"products": [{"sku": "A-100", "name": "Kettle", "price": 24.9, "in_stock": True},
                   {"sku": "A-101", "name": "Toaster", "price": 31.5, "in_stock": False},
                   {"sku": "B-200", "name": "Blender", "price": 59.0, "in_stock": True},
                   {"sku": "B-201", "name": "Mixer", "price": 89.99, "in_stock": True}]}),
    ("weather-report", "Give tomorrow's forecast for Lyon with high and low in Celsius, conditions, and an empty alert list.",
     {"city": "Lyon", "date": "2025-06-02",
      "forecast": {"high": 27, "low": 15, "conditions": "partly cloudy"}, "alerts": []}),
    ("pancake-recipe", "Write a pancake recipe with title, servings, ingredient names and ordered steps.",
     {"title": "Pancakes", "servings": 4,
      "ingredients": ["flour", "milk", "eggs", "sugar"],
      "steps": ["Whisk the dry ingredients", "Add milk and eggs", "Cook on a hot pan"]}),
    ("library-books", "Describe the Westside library and three of its books with title, author and year.",
     {"library": {"name": "Westside", "books": [
         {"title": "Dune", "author": "Frank Herbert", "year": 1965},
         {"title": "Emma", "author": "Jane Austen", "year": 1815},
         {"title": "Ubik", "author": "Philip K. Dick", "year": 1969}]}}),
    ("server-config", "Create a web server configuration with host, port, TLS settings, worker count and log level.",
     {"server": {"host": "0.0.0.0", "port": 8443,
                 "tls": {"enabled": True, "cert_path": "/etc/ssl/site.pem"}},
      "workers": 8, "log_level": "info"}),
    ("customer-order", "Record order 5521 for Dana Ruiz with two line items and the order total.",
     {"order_id": 5521, "customer": {"name": "Dana Ruiz", "email": "dana@example.com"},
      "items": [{"sku": "K-7", "qty": 2, "unit_price": 12.5},
                {"sku": "M-3", "qty": 1, "unit_price": 40}],
      "total": 65}),
    ("conference-schedule", "Lay out the morning sessions of DataConf with time, speaker and topic.",
     {"event": "DataConf", "sessions": [
         {"time": "09:00", "speaker": "Ines", "topic": "Streaming joins"},
         {"time": "10:00", "speaker": "Omar", "topic": "Column stores"},
         {"time": "11:00", "speaker": "Priya", "topic": "Query planning"}]}),
    ("employee-profile", "Describe employee Sam Okafor with skills, no manager, and active status.",
     {"name": "Sam Okafor", "skills": ["rust", "sql", "terraform"], "manager": None, "active": True}),
    ("sensor-readings", "Report five temperature readings from sensor T-12 with timestamp offset and value.",
     {"sensor_id": "T-12", "unit": "C", "readings": [
         {"t": 0, "value": 21.4}, {"t": 60, "value": 21.6}, {"t": 120, "value": 21.9},
         {"t": 180, "value": 22.3}, {"t": 240, "value": 22.1}]}),
    ("project-milestones", "List the project milestones with completion flags and their task names.",
     {"project": "Atlas", "milestones": [
         {"name": "Design", "done": True, "tasks": ["wireframes", "review"]},
         {"name": "Build", "done": False, "tasks": ["api", "ui", "tests"]},
         {"name": "Launch", "done": False, "tasks": []}]}),
    ("country-facts", "Summarize Portugal: capital, population, languages and land neighbours with border length.",
     {"country": "Portugal", "capital": "Lisbon", "population": 10467366,
      "languages": ["Portuguese", "Mirandese"],
      "neighbors": [{"name": "Spain", "border_km": 1214}]}),
]


def convert(value, fmt):
    out = subprocess.run([str(BIN), "convert", "--from", "json", "--to", fmt],
                         input=json.dumps(value), capture_output=True, text=True, check=True)
    return out.stdout.rstrip("\n")


def wrap_xml(value):
    return {"response": value}


def fence(text, tag):
    return f"```{tag}\n{text}\n```"


def bump_first_length(text):
    return re.sub(r"\[(\d+)\]", lambda m: f"[{int(m.group(1)) + 1}]", text, count=1)


def drop_last_line(text):
    return "\n".join(text.split("\n")[:-1])


def misindent(text):
    return text.replace("\n  ", "\n   ", 1)


# (instance index, format) -> (value edit, text edit)
DEFECTS = {
    (0, "json"): (None, lambda t: t[:-6]),
    (1, "xml"): (None, lambda t: fence(t, "xml")),
    (2, "toon"): (None, bump_first_length),
    (3, "xml"): (None, lambda t: t[:-12]),
    (4, "json"): (None, lambda t: fence(t, "json")),
    (5, "json"): (lambda v: v.pop("log_level"), None),
    (6, "toon"): (None, misindent),
    (7, "yaml"): (None, lambda t: fence(t, "yaml")),
    (8, "toon"): (lambda v: v.update(active=False), lambda t: fence(t, "toon")),
    (9, "toon"): (None, drop_last_line),
    (10, "yaml"): (lambda v: v["milestones"][1].update(done=True), None),
    (11, "toon"): (lambda v: v.update(population=10467000), None),
    (11, "xml"): (lambda v: v["neighbors"][0].update(border_km="1,214"), None),
}


def tokens(text):
    return len(re.findall(r"\w+|[^\w\s]", text))


def main():
    rng = random.Random(20250601)
    corpus_lines, replay_lines = [], []
    stamp = datetime(2025, 6, 1, 10, 0, 0, tzinfo=timezone.utc)
    for i, (iid, desc, expected) in enumerate(CORPUS):
        corpus_lines.append(json.dumps(
            {"instance_id": iid, "description": desc, "expected": expected, "formats": FORMATS}))
        for fmt in FORMATS:
            value = json.loads(json.dumps(expected))
            value_edit, text_edit = DEFECTS.get((i, fmt), (None, None))
            if value_edit:
                value_edit(value)
            text = convert(wrap_xml(value) if fmt == "xml" else value, fmt)
            if text_edit:
                text = text_edit(text)
            n = tokens(text)
            x = INTENSITY[fmt] * rng.uniform(0.85, 1.15)
            duration = n * SECONDS_PER_TOKEN[fmt] * rng.uniform(0.9, 1.1)
            stamp += timedelta(seconds=7)
            replay_lines.append(json.dumps({
                "instance_id": iid, "model_id": MODEL, "format": fmt, "prompt": desc,
                "output_text": text, "n_tokens": n, "duration_s": float(f"{duration:.4g}"),
                "duration_mode": "decode", "energy_kwh": None,
                "ce_kg": float(f"{x * n / 1000:.4g}"),
                "fence_stripped": False, "failed": False,
                "timestamp": stamp.strftime("%Y-%m-%dT%H:%M:%SZ"),
            }))
    (HERE / "corpus.jsonl").write_text("\n".join(corpus_lines) + "\n")
    (HERE / "replay.jsonl").write_text("\n".join(replay_lines) + "\n")

    golden = HERE / "golden"
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        common = ["--corpus", str(HERE / "corpus.jsonl")]
        subprocess.run([str(BIN), "run", *common, "--config", str(HERE / "config.toml"),
                        "--backend", "replay", "--replay-file", str(HERE / "replay.jsonl"),
                        "--formats", ",".join(FORMATS), "--out", str(tmp / "run")], check=True)
        records = ["--records", str(tmp / "run" / "records.jsonl")]
        subprocess.run([str(BIN), "score", *records, *common, "--out", str(tmp / "score")], check=True)
        subprocess.run([str(BIN), "report", *records, *common, "--out", str(tmp / "report")], check=True)
        golden.mkdir(exist_ok=True)
        shutil.copy(tmp / "run" / "records.jsonl", golden / "records.jsonl")
        shutil.copy(tmp / "score" / "scores.jsonl", golden / "scores.jsonl")
        for name in ["summary.csv", "pairs.csv", "gamma_sweep.csv", "gamma_crossing.csv"]:
            shutil.copy(tmp / "report" / name, golden / name)


if __name__ == "__main__":
    main()
