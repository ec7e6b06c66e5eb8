"""Persist an index and load it back byte for byte."""

import tempfile
from pathlib import Path

from gramdex.index_plan import build_index, dump_index, load_index
from gramdex.select_free import FreeConfig, select_free
from gramdex.workload import SyntheticSpec, generate_synthetic

workload, _ = generate_synthetic(SyntheticSpec(seed=1, record_count=2000))
index = build_index(workload, select_free(workload, FreeConfig(c=0.2, max_n=3)))

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "index.bin"
    path.write_bytes(dump_index(index))
    again = load_index(path.read_bytes())
    print(f"{index.key_count} keys, {index.total_posting_entries} postings")
    print(f"snapshot {path.stat().st_size} bytes (delta-coded), in-memory size {index.byte_size} bytes")
    print("identical after reload:", again == index and dump_index(again) == path.read_bytes())
