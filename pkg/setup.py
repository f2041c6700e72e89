'''
The setup.py file is an essential part of packaging and 
distributing Python projects. It is used by setuptools 
to define the configuration of the project, such as its
metadata, dependencies, entry points and shipped data files
'''
from setuptools import setup, find_packages
from typing import List

from soccerevents import __version__

TEST_REQUIREMENTS = {'pytest', 'hypothesis'}


def get_requirements() -> List[str]:
    '''
    This function reads the requirements.txt file and returns a list of
    runtime requirements to be installed.
    '''
    requirement_lst:List[str] = []
    try:
        with open('requirements.txt', 'r') as file:
            # Read lines from the file and remove leading/trailing whitespaces
            lines = file.readlines()
            for line in lines:
                requirement = line.strip()
                if requirement and not requirement.startswith('#') and requirement not in TEST_REQUIREMENTS:
                    requirement_lst.append(requirement)
    except FileNotFoundError:
        print('Requirements file not found.')

    return requirement_lst

setup(
    name="soccerevents",
    version=__version__,
    description="Soccer event detection from positional data with a temporal rule language",
    packages=find_packages(exclude=["tests", "tests.*"]),
    package_data={"soccerevents.dsl": ["*.cer"]},
    include_package_data=True,
    install_requires=get_requirements(),
    extras_require={"test": sorted(TEST_REQUIREMENTS)},
    entry_points={"console_scripts": ["soccerevents=soccerevents.cli:main"]},
    python_requires=">=3.8",
)
