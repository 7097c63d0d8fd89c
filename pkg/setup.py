"""Setup configuration for the seqpt package."""

try:
    from setuptools import find_packages, setup
except ImportError:
    from distutils.core import setup

setup(
    name="seqpt",
    version="0.1.0",
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    install_requires=[
        "numpy>=1.24.0",
        "typing-extensions>=4.5.0",
        "pydantic>=1.9.0,<2.0.0",
        "python-dotenv>=1.0.0",
        "psutil>=5.9.0",
        "tqdm>=4.38.0,<5.0.0",
    ],
    extras_require={"dev": ["pytest>=8.0.0", "scipy>=1.10.0", "pylint>=3.0.0"]},
    entry_points={"console_scripts": ["seqpt=src.cli:main"]},
    description="Selective efficient quantum process tomography over mutually unbiased bases",
    keywords="quantum, process tomography, mutually unbiased bases, stabilizer, chi matrix",
    python_requires=">=3.8",
)
