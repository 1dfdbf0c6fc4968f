import setuptools

with open("README.md", "r") as fh:
    long_description = fh.read()
packages = setuptools.find_namespace_packages(include=['hmcst_model*'])

setuptools.setup(
    name="hmcst-model",
    version="0.1.0",
    description="Executable, checkable model of the HMCS-T hierarchical abortable queue lock.",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=packages,
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
    python_requires='>=3.7',
    install_requires=[
        "simple_parsing>=0.0.12",
        "networkx>=2.4",
        "pyyaml",
    ],
    extras_require={
        "test": ["pytest"],
    },
    entry_points={
        "console_scripts": [
            "hmcst = hmcst_model.cli:main",
        ],
    },
)
