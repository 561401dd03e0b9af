import json
import pathlib
import sys

import jsonschema

schema = json.loads(pathlib.Path(sys.argv[1]).read_text())
jsonschema.Draft202012Validator.check_schema(schema)
configs = sorted(pathlib.Path(sys.argv[2]).glob("*.json"))
if not configs:
    sys.exit("no configs found")
for p in configs:
    jsonschema.validate(json.loads(p.read_text()), schema)
    print(f"{p.name}: ok")
