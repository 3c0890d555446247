"""Dataclass configs with command-line overrides (``--field value``)."""
import argparse
import dataclasses
import json


def parse_config(cls, argv=None):
    parser = argparse.ArgumentParser(description=cls.__doc__)
    for f in dataclasses.fields(cls):
        kind = f.type  # configs use plain int/float/str fields
        parser.add_argument(f"--{f.name.replace('_', '-')}", type=kind, default=f.default)
    return cls(**vars(parser.parse_args(argv)))


def emit(**fields):
    print(json.dumps(fields, sort_keys=True), flush=True)
