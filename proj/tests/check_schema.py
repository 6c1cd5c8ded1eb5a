# Copyright 2026 The drkit Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Runs every report-producing drkit command and checks the output against
schema/report.schema.json. Usage: check_schema.py <drkit> <schema>"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema


def main() -> int:
    drkit, schema_path = sys.argv[1], sys.argv[2]
    schema = json.loads(Path(schema_path).read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)

    with tempfile.TemporaryDirectory() as tmp:
        prefix = str(Path(tmp) / "syn")
        subprocess.run([drkit, "synth", "--width", "24", "--n-train", "300", "--n-test", "120",
                        "--seed", "5", "--out-prefix", prefix], check=True)
        train, test = prefix + ".train.fvec", prefix + ".test.fvec"
        quick = ["--grid", "0.25,0.5,1.0", "--seeds", "2", "--seed", "1"]
        runs = {
            "dr probe": ["dr", "--train", train, "--test", test, "--task", "probe",
                         "--delta", "0.9", "--epochs", "3", *quick],
            "dr cka": ["dr", "--test", test, "--task", "cka", "--delta", "0.9", *quick],
            "cka pairwise": ["cka", "--input", test, "--mode", "pairwise", "--pairs", "2", *quick],
            "compare": ["compare", "--train", train, "--test", test, "--epochs", "3", *quick],
            "fairness": ["fairness", "--train", train, "--test", test, "--epochs", "3", *quick],
            "probe": ["probe", "--train", train, "--test", test, "--prefix", "5", "--seed", "1",
                      "--epochs", "3"],
        }
        failures = 0
        for name, args in runs.items():
            out = subprocess.run([drkit, *args], check=True, capture_output=True, text=True).stdout
            errors = sorted(validator.iter_errors(json.loads(out)), key=str)
            for err in errors:
                print(f"{name}: {err.json_path}: {err.message}")
            print(f"{'FAIL' if errors else 'ok'}  {name}")
            failures += bool(errors)

        broken = json.loads(subprocess.run([drkit, *runs["dr cka"]], check=True,
                                           capture_output=True, text=True).stdout)
        broken["curve"][-1]["mean_ratio"] = 0.99
        if validator.is_valid(broken):
            print("FAIL  schema accepted a ratio below 1.0 at fraction 1.0")
            failures += 1
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
