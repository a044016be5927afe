# setup.py

from setuptools import find_packages, setup

requirements = [line.strip() for line in open("requirements.txt")]

setup(
  name='query_expansion',
  version='0.1',
  packages=find_packages(exclude=["tests"]),
  install_requires=requirements,
  package_data={"query_expansion": ["etc/config.ini", "etc/stoplist.txt", "etc/role_mapping.tsv"]},
)
