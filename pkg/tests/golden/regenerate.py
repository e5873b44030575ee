"""Rewrite the golden reports from their configs.

Run only after verifying a behaviour change: python tests/golden/regenerate.py
"""

from pathlib import Path

from clt_lab.config import load_config
from clt_lab.report import run

HERE = Path(__file__).parent

if __name__ == "__main__":
    for cfg_path in sorted(HERE.glob("*.config.json")):
        stem = cfg_path.name[: -len(".config.json")]
        report = run(load_config(cfg_path), threads=1)
        (HERE / f"{stem}.report.json").write_text(report.to_json())
        (HERE / f"{stem}.report.csv").write_text(report.to_csv())
        print(stem, report.verdict.tag)
