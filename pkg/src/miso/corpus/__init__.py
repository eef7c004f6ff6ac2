"""Bundled example programs."""
from importlib import resources


def names() -> list[str]:
    return sorted(p.name[:-5] for p in resources.files(__name__).iterdir()
                  if p.name.endswith(".miso"))


def source(name: str) -> str:
    return resources.files(__name__).joinpath(f"{name}.miso").read_text(encoding="utf-8")


def path(name: str) -> str:
    return str(resources.files(__name__).joinpath(f"{name}.miso"))
