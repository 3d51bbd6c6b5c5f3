import pytest

from threadsumm.stemmer import stem

# Worked examples published with the original Porter algorithm.
PORTER_EXAMPLES = """
caresses caress  ponies poni  ties ti  caress caress  cats cat
feed feed  agreed agre  plastered plaster  bled bled  motoring motor  sing sing
conflated conflat  troubled troubl  sized size  hopping hop  tanned tan
falling fall  hissing hiss  fizzed fizz  failing fail  filing file
happy happi  sky sky
relational relat  conditional condit  rational ration  valenci valenc
hesitanci hesit  digitizer digit  conformabli conform  radicalli radic
differentli differ  vileli vile  analogousli analog  vietnamization vietnam
predication predic  operator oper  feudalism feudal  decisiveness decis
hopefulness hope  callousness callous  formaliti formal  sensitiviti sensit
sensibiliti sensibl
triplicate triplic  formative form  formalize formal  electriciti electr
electrical electr  hopeful hope  goodness good
revival reviv  allowance allow  inference infer  airliner airlin
gyroscopic gyroscop  adjustable adjust  defensible defens  irritant irrit
replacement replac  adjustment adjust  dependent depend  adoption adopt
homologou homolog  communism commun  activate activ  angulariti angular
homologous homolog  effective effect  bowdlerize bowdler
probate probat  rate rate  cease ceas  controll control  roll roll
""".split()

PAIRS = list(zip(PORTER_EXAMPLES[::2], PORTER_EXAMPLES[1::2]))


@pytest.mark.parametrize("word,expected", PAIRS)
def test_published_examples(word, expected):
    assert stem(word) == expected


@pytest.mark.parametrize("word", ["a", "is", "as", "us", "ox"])
def test_short_words_unchanged(word):
    assert stem(word) == word


def test_common_forum_words():
    assert stem("batteries") == "batteri"
    assert stem("running") == "run"
    assert stem("generalizations") == "gener"
    assert stem("players") == "player"
