from setuptools import setup, find_packages
from os import path

__version__ = "0.1.0"

here = path.abspath(path.dirname(__file__))

with open(path.join(here, "README.md"), encoding="utf-8") as f:
    long_description = f.read()

with open(path.join(here, "requirements.txt"), encoding="utf-8") as f:
    dependencies = [line.strip() for line in f if line.strip() and line.strip() != "pytest"]

setup(
    name="mcdh",
    version=__version__,
    description="Multi-category dynamic heterogeneity brand-choice models: latent Gaussian-process factors, NUTS sampling, holdout forecasting and comparison models.",
    long_description=long_description,
    long_description_content_type="text/markdown",
    license="MIT",
    classifiers=[
      "Development Status :: 3 - Alpha",
      "Intended Audience :: Science/Research",
      "Programming Language :: Python :: 3.10",
    ],
    packages=find_packages(exclude=["tests*"]),
    install_requires=dependencies,
    extras_require={"test": ["pytest"]},
    entry_points={"console_scripts": ["mcdh=mcdh.cli:main"]},
    python_requires=">=3.10",
)
