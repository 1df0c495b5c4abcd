"""Regenerate the bundled presentation and rule files in src/opca/data."""

import json
import os

from opca import library as L
from opca.backend import Classical, Qubit
from opca.io import matrix_to_json, rule_to_dict, system_to_json

OUT = os.path.join(os.path.dirname(__file__), "..", "src", "opca", "data")


def dump(name, obj):
    with open(os.path.join(OUT, name), "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def main():
    os.makedirs(OUT, exist_ok=True)
    dump("Z.json", L.Z().to_json() | {"name": "Z"})
    dump("Z2.json", L.Z2().to_json() | {"name": "Z2"})
    for n in (4, 5, 6, 7, 8):
        dump(f"Z{n}.json", L.Z(n).to_json())
    dump("Z6xZ5.json", L.torus(6, 5).to_json())
    dump("Z8xZ7.json", L.torus(8, 7).to_json())

    dump("shift-qubit.json", system_to_json(Qubit()) | {"name": "shift", "offsets": ["a"], "block": {"swap": 0}})
    dump("shift-classical.json", system_to_json(Classical(2)) | {"name": "shift", "offsets": ["a"], "block": {"swap": 0}})
    dump("identity-qubit.json", system_to_json(Qubit()) | {"name": "identity", "offsets": ["1"], "block": {"swap": 0}})
    dump("partial-swap.json", system_to_json(Qubit()) | {
        "name": "partial-swap", "offsets": ["a"],
        "block": {"dressed_swap": 0, "dressing": matrix_to_json(L.DRESSING)},
    })
    dump("tilted-cluster.json", rule_to_dict(L.tilted_cluster_rule()))
    dump("hadamard-walk.json", rule_to_dict(L.hadamard_walk_rule()))
    dump("conditional-shift-walk.json", rule_to_dict(L.conditional_shift_walk_rule()))
    unbalanced = rule_to_dict(L.hadamard_walk_rule()) | {
        "name": "unbalanced-walk",
        "coefficients": [matrix_to_json(T) for T in L.UNBALANCED_WALK],
    }
    dump("unbalanced-walk.json", unbalanced)
    dump("xor.json", system_to_json(Classical(2)) | {"name": "xor", "global": {"gf2_offsets": list(L.XOR_OFFSETS)}})
    tampered = rule_to_dict(L.shift_rule(Qubit()).perturbed(1e-3))
    dump("shift-qubit-tampered.json", tampered)


if __name__ == "__main__":
    main()
