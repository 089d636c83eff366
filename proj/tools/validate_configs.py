"""Validate config files against docs/config.schema.json."""
import json
import sys

import jsonschema


def main(argv):
    schema_path, *configs = argv
    with open(schema_path) as f:
        schema = json.load(f)
    jsonschema.Draft202012Validator.check_schema(schema)
    failures = 0
    for path in configs:
        with open(path) as f:
            config = json.load(f)
        command = config.get("command")
        sub = {"$ref": f"#/$defs/{command}", "$defs": schema["$defs"]} if command else schema
        errors = list(jsonschema.Draft202012Validator(sub).iter_errors(config))
        for e in errors:
            print(f"{path}: {e.json_path}: {e.message}")
        failures += bool(errors)
        print(f"{'ok' if not errors else 'INVALID'} {path}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
