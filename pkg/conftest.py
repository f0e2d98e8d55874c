import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'shuffleprivacy.settings')
django.setup()
