"""Rule-Based Binary Translation with Coordination Passes"""

from setuptools import setup, find_packages
from syncdbt import __version__

setup(
    name='syncdbt',
    version=__version__,
    packages=find_packages(exclude=['examples', 'examples.*']),
    package_data={'syncdbt': ['data/*.rules', 'data/workloads/*.s', 'data/workloads/*.toml',
                              'data/workloads/*.json']},
    url='',
    description='Rule-based dynamic binary translator with passes that reduce guest/host state coordination',
    long_description=open('README.rst').read(),
    python_requires='>=3.11',
    install_requires=[
        'numpy',
        'pandas',
        'pydantic>=2',
    ],
    entry_points={
        'console_scripts': ['syncdbt = syncdbt.cli:main'],
    },
)
