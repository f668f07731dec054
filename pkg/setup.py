from setuptools import setup, find_packages

setup(
    name="coil-link",
    version="0.1.0",
    packages=find_packages(exclude=["tests", "tests.*"]),
    python_requires=">=3.8",
    install_requires=[
        "numpy",
        "scipy",
        "matplotlib",
        "networkx"
    ],
    entry_points={
        "console_scripts": [
            "coil-link=coillink.cli:main",
        ],
    },
)
