"""Brute-force neighbourhood sizes for the single-move mutation operators.

A move is one of: change the training-frequency bin; change the activation,
weight init or size bin of one layer; delete one layer (depth > 1); insert
any role-legal layer at any position (depth < max). Neighbours are distinct
resulting genotypes other than the start.

Run: python3 neighbors_oracle.py
"""

import itertools

ACT, INIT, SIZE, FREQ = 5, 3, 5, 5
KINDS = {"g": ("dense", "transposed_conv"), "d": ("dense", "conv")}


def moves(gan, max_depth):
    tf, nets = gan[0], {"g": gan[1], "d": gan[2]}

    def build(tf_, role=None, layers=None):
        g = layers if role == "g" else nets["g"]
        d = layers if role == "d" else nets["d"]
        return (tf_, tuple(g), tuple(d))

    out = {"freq": [], "change": [], "delete": [], "add": []}
    for v in range(FREQ):
        if v != tf:
            out["freq"].append(build(v))
    for role in ("g", "d"):
        layers = list(nets[role])
        for p, layer in enumerate(layers):
            for attr, card in ((1, ACT), (2, INIT), (3, SIZE)):
                for v in range(card):
                    if v == layer[attr]:
                        continue
                    new = list(layer)
                    new[attr] = v
                    out["change"].append(
                        build(tf, role, layers[:p] + [tuple(new)] + layers[p + 1:]))
        if len(layers) > 1:
            for p in range(len(layers)):
                out["delete"].append(build(tf, role, layers[:p] + layers[p + 1:]))
        if len(layers) < max_depth[role]:
            for p in range(len(layers) + 1):
                for new in itertools.product(KINDS[role], range(ACT),
                                             range(INIT), range(SIZE)):
                    out["add"].append(build(tf, role, layers[:p] + [new] + layers[p:]))
    return out


def report(name, gan, max_depth):
    m = moves(gan, max_depth)
    distinct = {g for lst in m.values() for g in lst} - {gan}
    counts = {k: len(v) for k, v in m.items()}
    print(f"{name}: raw={counts} distinct={len(distinct)}")


def main():
    joint = {"g": 3, "d": 4}
    per_network = {"g": 6, "d": 6}
    base = ("dense", 0, 0, 0)
    report("single", (0, (base,), (base,)), joint)
    report("full",
           (2, (("dense", 1, 2, 3), ("transposed_conv", 0, 0, 4),
                ("dense", 1, 2, 3)),
            (("conv", 4, 1, 0), ("conv", 4, 1, 0), ("dense", 2, 2, 2),
             ("conv", 4, 1, 0))),
           joint)
    report("repeated",
           (4, (("transposed_conv", 3, 1, 1), ("transposed_conv", 3, 1, 1)),
            (("dense", 0, 0, 0), ("conv", 2, 1, 4), ("conv", 2, 1, 4))),
           per_network)


if __name__ == "__main__":
    main()
