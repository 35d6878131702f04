"""Published full-scale results on the Top-Ten dataset, kept as reference rows.

They require the original Java-Large corpus and a pretrained code2vec model,
so they are listed next to desk-scale runs rather than reproduced. Values are
percentages: precision, recall, F1.
"""

from __future__ import annotations

from .analysis.metrics import Metrics

_HANDCRAFTED = """
equals    HC_Binary           98.54  98.88  98.71
equals    HC_Norm             98.20  97.98  98.09
equals    HC_Binary_CX_Norm   99.21  98.54  98.87
equals    HC_Norm_CX_Norm     98.99  98.76  98.87
main      HC_Binary           94.62  96.85  95.72
main      HC_Norm             91.70  94.59  93.12
main      HC_Binary_CX_Norm   94.72  97.15  95.92
main      HC_Norm_CX_Norm     91.04  94.98  92.97
setUp     HC_Binary           87.70  86.10  86.89
setUp     HC_Norm             78.90  90.87  84.46
setUp     HC_Binary_CX_Norm   90.26  93.68  91.94
setUp     HC_Norm_CX_Norm     87.53  92.70  90.04
onCreate  HC_Binary          100.00  92.99  96.37
onCreate  HC_Norm            100.00  92.86  96.30
onCreate  HC_Binary_CX_Norm   99.86  93.13  96.38
onCreate  HC_Norm_CX_Norm    100.00  92.45  96.08
toString  HC_Binary           93.41  97.65  95.48
toString  HC_Norm             93.56  95.46  94.50
toString  HC_Binary_CX_Norm   95.57  94.52  95.04
toString  HC_Norm_CX_Norm     94.81  94.37  94.59
run       HC_Binary           62.03  61.87  61.95
run       HC_Norm             60.51  75.74  67.27
run       HC_Binary_CX_Norm   69.24  66.75  67.97
run       HC_Norm_CX_Norm     69.55  70.09  69.82
hashCode  HC_Binary           97.06  94.29  95.65
hashCode  HC_Norm             96.85  95.84  96.34
hashCode  HC_Binary_CX_Norm   98.95  97.92  98.43
hashCode  HC_Norm_CX_Norm     98.19  98.44  98.31
init      HC_Binary           74.73  94.25  83.36
init      HC_Norm             73.55  92.17  81.81
init      HC_Binary_CX_Norm   77.72  90.58  83.66
init      HC_Norm_CX_Norm     75.43  91.69  82.77
execute   HC_Binary           76.25  86.89  81.22
execute   HC_Norm             63.60  94.59  76.06
execute   HC_Binary_CX_Norm   80.67  82.05  81.35
execute   HC_Norm_CX_Norm     76.36  92.02  83.46
get       HC_Binary           86.76  95.82  91.07
get       HC_Norm             84.96  91.04  87.89
get       HC_Binary_CX_Norm   89.89  95.52  92.62
get       HC_Norm_CX_Norm     88.54  92.24  90.35
"""

_CLASSIFIERS = """
equals    CharSeq             50.97  74.02  60.37
equals    TokenSeq            99.20  97.53  98.36
equals    HC_Binary_CX_Norm   99.21  98.54  98.87
equals    code2vec            99.55  99.10  99.32
main      CharSeq              0.00   0.00   0.00
main      TokenSeq            84.38  65.94  74.03
main      HC_Binary_CX_Norm   94.72  97.15  95.92
main      code2vec            98.72  98.52  98.62
setUp     CharSeq             26.12  59.83  36.36
setUp     TokenSeq            42.93  89.19  57.96
setUp     HC_Binary_CX_Norm   90.26  93.68  91.94
setUp     code2vec            99.26  94.10  96.61
onCreate  CharSeq             59.89  87.74  71.19
onCreate  TokenSeq            94.70  91.51  93.08
onCreate  HC_Binary_CX_Norm   99.86  93.13  96.38
onCreate  code2vec           100.00  99.06  99.53
toString  CharSeq             51.64  74.02  60.84
toString  TokenSeq            85.14  88.73  86.90
toString  HC_Binary_CX_Norm   95.57  94.52  95.04
toString  code2vec            97.37  98.44  97.90
run       CharSeq             25.36  27.47  26.37
run       TokenSeq            37.96  51.99  43.88
run       HC_Binary_CX_Norm   69.24  66.75  67.97
run       code2vec            86.30  62.26  72.33
hashCode  CharSeq             30.18  52.99  38.45
hashCode  TokenSeq            74.70  97.40  84.55
hashCode  HC_Binary_CX_Norm   98.95  97.92  98.43
hashCode  code2vec            99.74  99.74  99.74
init      CharSeq              0.00   0.00   0.00
init      TokenSeq             0.00   0.00   0.00
init      HC_Binary_CX_Norm   77.72  90.58  83.66
init      code2vec            88.74  87.54  88.14
execute   CharSeq              2.44   0.28   0.51
execute   TokenSeq            41.04  31.34  35.54
execute   HC_Binary_CX_Norm   80.67  82.05  81.35
execute   code2vec            93.44  85.19  89.12
get       CharSeq             13.55  10.15  11.60
get       TokenSeq            43.77  92.24  59.37
get       HC_Binary_CX_Norm   89.89  95.52  92.62
get       code2vec            92.33  89.85  91.07
"""

# scheme: accuracy, precision, recall, F1 averaged over the ten methods
REFERENCE_AVERAGES = {
    "CharSeq": (38.65, 26.02, 38.65, 30.57),
    "TokenSeq": (70.58, 60.38, 70.59, 63.37),
    "HC_Binary": (88.32, 87.11, 90.56, 88.64),
    "HC_Norm": (86.27, 84.18, 92.11, 87.58),
    "HC_Binary_CX_Norm": (90.14, 89.61, 90.98, 90.22),
    "HC_Norm_CX_Norm": (89.36, 88.04, 91.77, 89.73),
    "code2vec": (93.73, 95.54, 91.38, 93.24),
}

# method: (train, validation, test) sizes after deduplication and balancing
REFERENCE_DATASET_SIZES = {
    "equals": (2000, 1212, 1778),
    "main": (2000, 1220, 2032),
    "setUp": (2000, 1220, 1424),
    "onCreate": (2000, 1876, 1484),
    "toString": (2000, 586, 1278),
    "run": (2000, 876, 1558),
    "hashCode": (2000, 534, 770),
    "init": (2000, 892, 2504),
    "execute": (2000, 498, 702),
    "get": (2000, 780, 670),
}

# F1 (%) after keeping the top 25% of dimensions by information gain
REFERENCE_PRUNED_F1 = {
    ("main", "HC_Binary"): 93.5,
    ("setUp", "HC_Binary"): 80.11,
    ("main", "code2vec"): 98.62,
    ("setUp", "code2vec"): 96.28,
}

CHARSEQ_VOCAB_SIZE = 94
TOKENSEQ_VOCAB_SIZE = 108106


def _parse(block: str) -> list[tuple[str, str, Metrics]]:
    rows = []
    for line in block.strip().splitlines():
        method, scheme, p, r, f = line.split()
        rows.append((method, scheme, Metrics(float("nan"), float(p) / 100, float(r) / 100,
                                             float(f) / 100)))
    return rows


def handcrafted_results() -> list[tuple[str, str, Metrics]]:
    """Four handcrafted encodings per method."""
    return _parse(_HANDCRAFTED)


def classifier_results() -> list[tuple[str, str, Metrics]]:
    """Sequence baselines, the best handcrafted encoding, and code2vec per method."""
    return _parse(_CLASSIFIERS)
