from django.apps import AppConfig


class CertdelConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'certdel'
    verbose_name = '可认证删除混合加密实验台'
