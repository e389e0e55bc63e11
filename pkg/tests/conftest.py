import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cslm.corpus import Corpus, Lang, TaggedToken, Utterance


def make_corpus(lines, default_lang=Lang.UNTAGGED, label="orig"):
    from cslm.corpus import parse_lines

    return parse_lines(lines, default_lang, label)


@pytest.fixture
def tiny_bilingual():
    return make_corpus(
        [
            "ik|nl wol|fy net|fy",
            "oer|fy it|fy wetter|fy",
            "de|nl hond|nl rent|nl",
            "sa|fy giet|fy dat|fy altyd|fy",
        ]
    )
