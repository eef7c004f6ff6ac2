import pytest

from miso import corpus
from miso.core.world import init_world
from miso.frontend import compile_source

LISTING1 = corpus.source("listing1")

# result lines collected by test_acceptance.py
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda l: int(l.split()[1])):
            terminalreporter.write_line(line)


def compile_corpus(name):
    return compile_source(corpus.source(name))


def blend_source(n=4, target=(100, 50, 0)):
    r, g, b = target
    return f"""
cell ImageBlend {{
  var r:Int = 0;
  var g:Int = 0;
  var b:Int = 0;
  transition {{
    r = .99 * r + .01 * image2(this.pos).r;
    g = .99 * g + .01 * image2(this.pos).g;
    b = .99 * b + .01 * image2(this.pos).b;
  }}
}}
cell StaticImage {{
  var r:Int = {r};
  var g:Int = {g};
  var b:Int = {b};
}}
image1 = new ImageBlend({n})
image2 = new StaticImage({n})
"""


@pytest.fixture
def blend():
    return compile_corpus("blend")


@pytest.fixture
def small_blend():
    return compile_source(blend_source())


def fresh(program):
    return init_world(program)
