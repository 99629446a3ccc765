import os

import django

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "euler_lifespan.settings")
django.setup()
