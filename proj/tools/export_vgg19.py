"""Export torchvision VGG-19 feature weights for `extractor.kind: vgg19`.

Usage: python3 tools/export_vgg19.py out.pt
Writes a dict {"features.<i>.weight": tensor, "features.<i>.bias": tensor}
readable by the C++ loader. Needs torchvision and access to its weight cache.
"""
import sys

import torch
import torchvision


def main():
    if len(sys.argv) != 2:
        sys.exit("usage: export_vgg19.py OUT.pt")
    model = torchvision.models.vgg19(weights=torchvision.models.VGG19_Weights.IMAGENET1K_V1)
    state = {k: v.detach().clone() for k, v in model.state_dict().items() if k.startswith("features.")}
    torch.save(state, sys.argv[1])
    print(f"wrote {len(state)} tensors to {sys.argv[1]}")


if __name__ == "__main__":
    main()
