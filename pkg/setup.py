"""opnet"""

from setuptools import find_packages, setup

with open("README.md") as f:
    desc = f.read()


install_requires = [
    "attrs",
    "numpy>=1.20",
    "pydantic[dotenv]>=1.8,<2",
]

extra_reqs = {
    "dev": ["pytest", "pytest-cov", "pre-commit", "flake8", "mypy", "isort"],
}


setup(
    name="opnet",
    description="Operations, wires and networks of quantum operations without predefined time",
    long_description=desc,
    long_description_content_type="text/markdown",
    version="0.1.0",
    python_requires=">=3.8",
    classifiers=[
        "Intended Audience :: Developers",
        "Intended Audience :: Science/Research",
        "Programming Language :: Python :: 3.8",
        "Topic :: Scientific/Engineering :: Physics",
        "License :: OSI Approved :: MIT License",
    ],
    keywords="quantum process-matrix choi-jamiolkowski tensor-network",
    license="MIT",
    packages=find_packages(exclude=["tests"]),
    zip_safe=False,
    install_requires=install_requires,
    tests_require=extra_reqs["dev"],
    extras_require=extra_reqs,
    entry_points={"console_scripts": ["opnet = opnet.cli.app:run_cli"]},
)
