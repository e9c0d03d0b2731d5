from setuptools import setup, find_packages

with open("README.md") as f:
    long_description = f.read()

setup(
    name="cvmdi-ps",
    version="0.1.0",
    description="Secret key rates of continuous-variable MDI-QKD with photon subtraction",
    long_description=long_description,
    long_description_content_type="text/markdown",
    classifiers=[
        "Development Status :: 4 - Beta",
        "Programming Language :: Python :: 3",
        "Operating System :: OS Independent",
        "License :: OSI Approved :: MIT License",
        "Topic :: Scientific/Engineering :: Physics"
    ],
    packages=find_packages(exclude=["tests", "tests.*"]),
    include_package_data=True,
    python_requires='>=3.10',
    install_requires=[
        "numpy",
        "psutil",
        "scipy"
    ],
    extras_require={
        'test': [
            "pytest",
            "hypothesis"
        ],
        'docs': [
            "sphinx",
            "sphinx-rtd-theme",
            "enum-tools",
            "sphinx-toolbox"
        ]
    },
    entry_points={
        "console_scripts": [
            "cvmdips = cvmdips.cli:main"
        ]
    }
)
