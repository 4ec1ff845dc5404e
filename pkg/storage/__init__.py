from storage.run_store import CSV_FLOAT_FORMAT, RunStore, canonical_json

__all__ = ["CSV_FLOAT_FORMAT", "RunStore", "canonical_json"]
