import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dsnlg.cli import bundled  # noqa: E402
from dsnlg.ds import load_grammar  # noqa: E402
from dsnlg.evaluation import load_corpus, load_revisions  # noqa: E402
from dsnlg.model import train  # noqa: E402
from dsnlg.ttr import parse_rt  # noqa: E402

JOHN_ARRIVES = "[x=john:e, e=arrive:es, p=subj(e,x):t, head=p:t]"
MARY_ARRIVES = "[x=mary:e, e=arrive:es, p=subj(e,x):t, head=p:t]"
JOHN_PREFIX = "[x=john:e, head=x:e]"


@pytest.fixture(scope="session")
def lexicon():
    return load_grammar(bundled("toy.lex"))


@pytest.fixture(scope="session")
def corpus():
    return load_corpus(bundled("toy_corpus.tsv"))


@pytest.fixture(scope="session")
def model(lexicon, corpus):
    return train([(e.tokens, e.goal) for e in corpus], lexicon)


@pytest.fixture(scope="session")
def fixture_revisions():
    return load_revisions(bundled("toy_revisions.tsv"))


@pytest.fixture
def goal_john():
    return parse_rt(JOHN_ARRIVES)


@pytest.fixture
def goal_mary():
    return parse_rt(MARY_ARRIVES)
