from pathlib import Path

PROJECT_ROOT = Path(__file__).resolve().parents[2]
DATA_RAW = PROJECT_ROOT / "data" / "raw"
DATA_PROCESSED = PROJECT_ROOT / "data" / "processed"

CHANGES_JSONL = DATA_RAW / "changes.jsonl"
CLONEBENCH_DIR = DATA_RAW / "clonebench"
INDEX_FILE = DATA_PROCESSED / "snapshots.kgidx"
DEFECT_METRICS_JSON = DATA_PROCESSED / "defect_metrics.json"
CLONE_METRICS_JSON = DATA_PROCESSED / "clone_metrics.json"
