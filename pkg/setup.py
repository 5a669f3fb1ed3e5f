import os
from setuptools import setup

HERE = os.path.abspath(os.path.dirname(__file__))

about = {}
with open(os.path.join(HERE, "goldpart", "__version__.py")) as f:
    exec(f.read(), about)

LONG = (
    "Python 3 workbench for Goldbach partitions: exact partition counts "
    "over large ranges, the classical analytic approximations, a "
    "numpy-only neural network trained on multi-base digit features, "
    "and an adversarial digit search whose result is realized with the "
    "Chinese remainder theorem."
)

SHORT = "Workbench for counting and predicting Goldbach partitions."

setup(
    name="goldpart",
    version=about["__version__"],
    description=SHORT,
    long_description=LONG,
    license="Public Domain CC0",
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Mathematics",
        "License :: CC0 1.0 Universal (CC0 1.0) Public Domain Dedication",
        "Natural Language :: English",
        "Programming Language :: Python :: 3.8",
    ],
    packages=["goldpart"],
    python_requires=">=3.8",
    install_requires=["numpy", "matplotlib", "pandas", "attrs"],
    entry_points={"console_scripts": ["goldpart=goldpart.cli:main"]},
    zip_safe=False,
    tests_require=["numpy", "pandas"],
    test_suite="tests",
    extras_require={"tests": ["pytest"], "docs": ["sphinx >= 1.4"]},
)
